#pragma once

#include <array>
#include <string>
#include <vector>

#include "tsrep/common.hpp"
#include "tsrep/series.hpp"

namespace tsrep {

inline constexpr int kNumForecasters = 7;

// What the per-series regression targets are: scaled holdout errors
// (MASE-type, scale-free; the default) or the raw point forecasts.
enum class TargetKind { mase, raw_forecast };

const std::array<std::string, kNumForecasters>& forecaster_names();

// Point forecasts of the seven benchmark methods over horizon 1..h, fit on
// `train` only: naive, seasonal naive, mean, moving average (window 7),
// SES (alpha by grid search 0.01..0.99 minimizing in-sample SSE),
// Croston (alpha = 0.1), drift.
std::array<std::vector<double>, kNumForecasters> forecast_bank(const std::vector<double>& train,
                                                               int frequency, int horizon);

// One row per series that produced valid targets, one column per method.
struct TargetBank {
  std::vector<std::string> series_ids;
  std::vector<std::string> method_names;
  Matrix values;
  std::vector<std::string> excluded_ids;  // too short or zero scaling denominator
};

// Splits off the last `holdout` periods of each series, fits the seven
// forecasters on the remainder, and records the mean absolute scaled error
// per method (denominator: in-sample mean absolute seasonal-naive error).
// holdout = 0 picks the level default: 28 daily, 4 weekly, 1 monthly.
TargetBank make_targets(const LabeledDataset& ds, int holdout = 0,
                        TargetKind kind = TargetKind::mase, int threads = 0);

void write_target_csv(const TargetBank& bank, const std::string& path);
TargetBank load_target_csv(const std::string& path);

}  // namespace tsrep
