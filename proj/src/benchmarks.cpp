#include "tsrep/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tsrep/csv.hpp"
#include "tsrep/stats.hpp"

namespace tsrep {

const std::array<std::string, kNumForecasters>& forecaster_names() {
  static const std::array<std::string, kNumForecasters> names = {
      "naive", "seasonal_naive", "mean", "moving_average", "ses", "croston", "drift"};
  return names;
}

namespace {

std::vector<double> flat_forecast(double level, int horizon) {
  return std::vector<double>(static_cast<std::size_t>(horizon), level);
}

std::vector<double> seasonal_naive_forecast(const std::vector<double>& train, int m,
                                            int horizon) {
  const int n = static_cast<int>(train.size());
  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) {
    const int back = m * ((h - 1) / m + 1);
    const int idx = n + h - 1 - back;
    out[h - 1] = idx >= 0 ? train[idx] : train.front();
  }
  return out;
}

double ses_level(const std::vector<double>& train) {
  // grid search on alpha, in-sample one-step SSE, level initialized at the
  // first observation; ties resolved toward the smaller alpha
  double best_alpha = 0.01;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int step = 1; step <= 99; ++step) {
    const double alpha = step / 100.0;
    double level = train.front();
    double sse = 0.0;
    for (std::size_t t = 1; t < train.size(); ++t) {
      const double err = train[t] - level;
      sse += err * err;
      level += alpha * err;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_alpha = alpha;
    }
  }
  double level = train.front();
  for (std::size_t t = 1; t < train.size(); ++t) level += best_alpha * (train[t] - level);
  return level;
}

double croston_rate(const std::vector<double>& train, double alpha) {
  double size = 0.0, interval = 0.0;
  bool seen = false;
  int gap = 0;
  for (double v : train) {
    ++gap;
    if (v == 0.0) continue;
    if (!seen) {
      size = v;
      interval = gap;
      seen = true;
    } else {
      size += alpha * (v - size);
      interval += alpha * (gap - interval);
    }
    gap = 0;
  }
  if (!seen) return 0.0;
  return size / interval;
}

std::vector<double> drift_forecast(const std::vector<double>& train, int horizon) {
  const double slope =
      (train.back() - train.front()) / static_cast<double>(train.size() - 1);
  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) out[h - 1] = train.back() + slope * h;
  return out;
}

int default_holdout(Level level) {
  switch (level) {
    case Level::daily: return 28;
    case Level::weekly: return 4;
    case Level::monthly: return 1;
  }
  return 28;
}

}  // namespace

std::array<std::vector<double>, kNumForecasters> forecast_bank(const std::vector<double>& train,
                                                               int frequency, int horizon) {
  if (train.size() < 2) throw ParamError("forecast_bank: training series too short");
  if (horizon < 1) throw ParamError("forecast_bank: horizon must be positive");
  std::array<std::vector<double>, kNumForecasters> out;
  out[0] = flat_forecast(train.back(), horizon);
  out[1] = seasonal_naive_forecast(train, frequency, horizon);
  out[2] = flat_forecast(mean_of(train), horizon);
  const std::size_t window = std::min<std::size_t>(7, train.size());
  out[3] = flat_forecast(
      std::accumulate(train.end() - window, train.end(), 0.0) / static_cast<double>(window),
      horizon);
  out[4] = flat_forecast(ses_level(train), horizon);
  out[5] = flat_forecast(croston_rate(train, 0.1), horizon);
  out[6] = drift_forecast(train, horizon);
  return out;
}

TargetBank make_targets(const LabeledDataset& ds, int holdout, TargetKind kind, int threads) {
  if (holdout == 0) holdout = default_holdout(ds.level);
  if (holdout < 1) throw ParamError("make_targets: holdout must be positive");

  TargetBank bank;
  bank.method_names.assign(forecaster_names().begin(), forecaster_names().end());

  struct RowResult {
    bool ok = false;
    std::array<double, kNumForecasters> targets{};
  };
  std::vector<RowResult> results(ds.series.size());

  parallel_for(ds.series.size(), threads, [&](std::size_t i) {
    const SalesSeries& s = ds.series[i];
    const int n = static_cast<int>(s.values.size());
    const int m = s.frequency;
    if (n <= holdout + 2 * m) return;  // too short; excluded
    std::vector<double> train(s.values.begin(), s.values.end() - holdout);
    std::vector<double> test(s.values.end() - holdout, s.values.end());

    // scaling denominator: in-sample mean absolute seasonal-naive error
    double denom = 0.0;
    int cnt = 0;
    for (std::size_t t = m; t < train.size(); ++t) {
      denom += std::fabs(train[t] - train[t - m]);
      ++cnt;
    }
    denom = cnt > 0 ? denom / cnt : 0.0;
    if (kind == TargetKind::mase && denom <= 0.0) return;  // no scale; excluded

    const auto forecasts = forecast_bank(train, m, holdout);
    RowResult r;
    r.ok = true;
    for (int f = 0; f < kNumForecasters; ++f) {
      if (kind == TargetKind::mase) {
        double mae = 0.0;
        for (int h = 0; h < holdout; ++h) mae += std::fabs(test[h] - forecasts[f][h]);
        r.targets[f] = mae / holdout / denom;
      } else {
        r.targets[f] = mean_of(forecasts[f]);
      }
    }
    results[i] = r;
  });

  std::size_t kept = 0;
  for (const auto& r : results)
    if (r.ok) ++kept;
  bank.values = Matrix(kept, kNumForecasters);
  std::size_t row = 0;
  for (std::size_t i = 0; i < ds.series.size(); ++i) {
    if (!results[i].ok) {
      bank.excluded_ids.push_back(ds.series[i].id);
      continue;
    }
    bank.series_ids.push_back(ds.series[i].id);
    for (int f = 0; f < kNumForecasters; ++f) bank.values.at(row, f) = results[i].targets[f];
    ++row;
  }
  return bank;
}

void write_target_csv(const TargetBank& bank, const std::string& path) {
  std::ostringstream out;
  out << "series_id";
  for (const auto& name : bank.method_names) out << "," << csv_escape(name);
  out << "\n";
  out.precision(17);
  for (std::size_t r = 0; r < bank.values.rows; ++r) {
    out << csv_escape(bank.series_ids[r]);
    for (std::size_t c = 0; c < bank.values.cols; ++c) out << "," << bank.values.at(r, c);
    out << "\n";
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << out.str();
}

TargetBank load_target_csv(const std::string& path) {
  auto rows = read_csv(path);
  if (rows.empty()) throw SchemaError("file '" + path + "': empty");
  const auto& header = rows.front();
  if (header.empty() || header[0] != "series_id")
    throw SchemaError("file '" + path + "': first column must be series_id");
  TargetBank bank;
  bank.method_names.assign(header.begin() + 1, header.end());
  bank.values = Matrix(rows.size() - 1, header.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw DataError("file '" + path + "', row " + std::to_string(r + 1) +
                      ": field count mismatch");
    bank.series_ids.push_back(rows[r][0]);
    for (std::size_t c = 1; c < rows[r].size(); ++c) {
      try {
        bank.values.at(r - 1, c - 1) = std::stod(rows[r][c]);
      } catch (const std::exception&) {
        throw DataError("file '" + path + "', row " + std::to_string(r + 1) +
                        ": bad numeric cell '" + rows[r][c] + "'");
      }
    }
  }
  return bank;
}

}  // namespace tsrep
