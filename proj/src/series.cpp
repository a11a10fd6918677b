#include "tsrep/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace tsrep {

// Howard Hinnant's civil-date algorithms.
DayNumber days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<DayNumber>(era) * 146097 + static_cast<DayNumber>(doe) - 719468;
}

void civil_from_days(DayNumber z, int& year, unsigned& month, unsigned& day) {
  z += 719468;
  const DayNumber era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const DayNumber y = static_cast<DayNumber>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = doy - (153 * mp + 2) / 5 + 1;
  month = mp + (mp < 10 ? 3 : -9);
  year = static_cast<int>(y + (month <= 2));
}

unsigned last_day_of_month(int year, unsigned month) {
  static const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[month - 1];
}

DayNumber parse_iso_date(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 ||
      d > last_day_of_month(y, m)) {
    throw DataError("invalid ISO-8601 date: '" + s + "'");
  }
  return days_from_civil(y, m, d);
}

std::string format_iso_date(DayNumber z) {
  int y;
  unsigned m, d;
  civil_from_days(z, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

int level_frequency(Level level) {
  switch (level) {
    case Level::daily: return 7;
    case Level::weekly: return 52;
    case Level::monthly: return 12;
  }
  return 7;
}

std::string level_name(Level level) {
  switch (level) {
    case Level::daily: return "daily";
    case Level::weekly: return "weekly";
    case Level::monthly: return "monthly";
  }
  return "daily";
}

Level level_from_name(const std::string& name) {
  if (name == "daily" || name == "d") return Level::daily;
  if (name == "weekly" || name == "w") return Level::weekly;
  if (name == "monthly" || name == "m") return Level::monthly;
  throw ParamError("unknown aggregation level: '" + name + "'");
}

void validate_series(const SalesSeries& s) {
  for (double v : s.values) {
    if (!std::isfinite(v)) throw DataError("series '" + s.id + "': non-finite value");
    if (v < 0.0) throw DataError("series '" + s.id + "': negative value");
  }
  if (s.frequency <= 0) throw DataError("series '" + s.id + "': non-positive frequency");
  if (s.dates) {
    if (s.dates->size() != s.values.size())
      throw DataError("series '" + s.id + "': dates/values length mismatch");
    for (std::size_t i = 1; i < s.dates->size(); ++i) {
      if ((*s.dates)[i] != (*s.dates)[i - 1] + 1)
        throw DataError("series '" + s.id + "': dates not consecutive at position " +
                        std::to_string(i) + " (" + format_iso_date((*s.dates)[i]) + ")");
    }
  }
}

const SalesSeries* LabeledDataset::find(const std::string& id) const {
  for (const auto& s : series)
    if (s.id == id) return &s;
  return nullptr;
}

void validate_dataset(const LabeledDataset& ds) {
  std::set<std::string> ids;
  for (const auto& s : ds.series) {
    validate_series(s);
    if (!ids.insert(s.id).second) throw DataError("duplicate series id '" + s.id + "'");
  }
  for (const auto& [task, labels] : ds.tasks) {
    if (labels.size() != ds.series.size())
      throw DataError("task '" + task + "': label count mismatch");
    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2)
      throw DataError("task '" + task + "': fewer than 2 distinct labels");
  }
}

namespace {

SalesSeries aggregate_blocks(const SalesSeries& s, std::size_t block, int out_frequency) {
  SalesSeries out;
  out.id = s.id;
  out.frequency = out_frequency;
  const std::size_t nblocks = s.values.size() / block;
  out.values.reserve(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < block; ++i) sum += s.values[b * block + i];
    out.values.push_back(sum);
  }
  return out;
}

SalesSeries aggregate_calendar_months(const SalesSeries& s) {
  SalesSeries out;
  out.id = s.id;
  out.frequency = 12;
  const auto& dates = *s.dates;
  // Complete months only: drop the first month unless the series starts on
  // its day 1, the last unless it ends on its last day.
  std::size_t i = 0;
  const std::size_t n = dates.size();
  while (i < n) {
    int y;
    unsigned m, d;
    civil_from_days(dates[i], y, m, d);
    const unsigned month_len = last_day_of_month(y, m);
    if (d != 1 || i + (month_len - 1) >= n) {
      // partial month; skip the remaining days of this month
      std::size_t j = i;
      while (j < n) {
        int y2;
        unsigned m2, d2;
        civil_from_days(dates[j], y2, m2, d2);
        if (y2 != y || m2 != m) break;
        ++j;
      }
      i = j;
      continue;
    }
    double sum = 0.0;
    for (unsigned k = 0; k < month_len; ++k) sum += s.values[i + k];
    out.values.push_back(sum);
    i += month_len;
  }
  return out;
}

}  // namespace

SalesSeries aggregate(const SalesSeries& s, Level target) {
  if (target == Level::daily) return s;
  SalesSeries out;
  switch (target) {
    case Level::weekly:
      out = aggregate_blocks(s, 7, 52);
      break;
    case Level::monthly:
      out = s.dates ? aggregate_calendar_months(s) : aggregate_blocks(s, 30, 12);
      break;
    default:
      out = s;
  }
  if (out.values.size() < 2)
    throw TooShortError("series '" + s.id + "': fewer than 2 observations after " +
                        level_name(target) + " aggregation");
  return out;
}

LabeledDataset aggregate(const LabeledDataset& ds, Level target) {
  if (ds.level != Level::daily) throw ParamError("aggregate expects a daily-level dataset");
  LabeledDataset out;
  out.level = target;
  out.tasks = ds.tasks;
  out.series.reserve(ds.series.size());
  for (const auto& s : ds.series) out.series.push_back(aggregate(s, target));
  return out;
}

}  // namespace tsrep
