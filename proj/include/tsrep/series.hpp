#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsrep/common.hpp"

namespace tsrep {

// Calendar dates are stored as serial day numbers (days since 1970-01-01).
using DayNumber = std::int64_t;

DayNumber days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(DayNumber z, int& year, unsigned& month, unsigned& day);
DayNumber parse_iso_date(const std::string& s);  // YYYY-MM-DD
std::string format_iso_date(DayNumber d);
unsigned last_day_of_month(int year, unsigned month);

enum class Level { daily, weekly, monthly };

int level_frequency(Level level);  // 7 / 52 / 12
std::string level_name(Level level);
Level level_from_name(const std::string& name);  // accepts "daily"/"d", ...

// One non-negative demand series. Dates, when present, are strictly
// increasing and spaced one day apart (the base granularity).
struct SalesSeries {
  std::string id;
  std::vector<double> values;
  std::optional<std::vector<DayNumber>> dates;
  int frequency = 7;

  std::size_t size() const { return values.size(); }
};

void validate_series(const SalesSeries& s);  // throws DataError on violation

// A collection of series plus per-series class labels per task.
// Immutable after construction; safe to share across workers.
struct LabeledDataset {
  std::vector<SalesSeries> series;
  // task name -> labels aligned with `series`
  std::map<std::string, std::vector<std::string>> tasks;
  Level level = Level::daily;

  std::size_t size() const { return series.size(); }
  const SalesSeries* find(const std::string& id) const;
};

void validate_dataset(const LabeledDataset& ds);

// Temporal aggregation, sum-preserving over complete buckets.
// Weekly: non-overlapping blocks of 7 days from the series start, trailing
// partial dropped. Monthly: calendar months when dates exist (partial
// first/last months dropped), else blocks of 30 days.
SalesSeries aggregate(const SalesSeries& s, Level target);

LabeledDataset aggregate(const LabeledDataset& ds, Level target);

}  // namespace tsrep
