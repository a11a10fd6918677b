#include "tsrep/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tsrep {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const std::string& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw SchemaError("file '" + path + "': missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double parse_value(const std::string& s, std::size_t row, const std::string& path) {
  double v = 0.0;
  const char* begin = s.c_str();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw DataError("file '" + path + "', row " + std::to_string(row) +
                    ": non-numeric value '" + s + "'");
  if (v < 0.0)
    throw DataError("file '" + path + "', row " + std::to_string(row) +
                    ": negative value '" + s + "'");
  return v;
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == EOF) break;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

LabeledDataset load_long_csv(const std::string& path, const std::string& id_col,
                             const std::string& date_col, const std::string& value_col,
                             int frequency) {
  auto rows = read_csv(path);
  if (rows.empty()) throw SchemaError("file '" + path + "': empty");
  const auto& header = rows.front();
  const std::size_t id_idx = find_column(header, id_col, path);
  const std::size_t value_idx = find_column(header, value_col, path);
  const bool dated = !date_col.empty();
  const std::size_t date_idx = dated ? find_column(header, date_col, path) : 0;

  struct Row {
    DayNumber date;
    double value;
  };
  std::map<std::string, std::vector<Row>> by_id;
  std::vector<std::string> id_order;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw DataError("file '" + path + "', row " + std::to_string(r + 1) +
                      ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(row.size()));
    const std::string& id = row[id_idx];
    const double v = parse_value(row[value_idx], r + 1, path);
    DayNumber d = 0;
    if (dated) {
      try {
        d = parse_iso_date(row[date_idx]);
      } catch (const DataError& e) {
        throw DataError("file '" + path + "', row " + std::to_string(r + 1) + ": " + e.what());
      }
    }
    auto [it, inserted] = by_id.try_emplace(id);
    if (inserted) id_order.push_back(id);
    it->second.push_back({d, v});
  }

  LabeledDataset ds;
  ds.level = Level::daily;
  for (const auto& id : id_order) {
    auto& rows_for_id = by_id[id];
    SalesSeries s;
    s.id = id;
    s.frequency = frequency;
    if (dated) {
      std::stable_sort(rows_for_id.begin(), rows_for_id.end(),
                       [](const Row& a, const Row& b) { return a.date < b.date; });
      std::vector<DayNumber> dates;
      for (const auto& row : rows_for_id) {
        if (!dates.empty() && row.date == dates.back())
          throw DataError("file '" + path + "': duplicate (id, date) = ('" + id + "', " +
                          format_iso_date(row.date) + ")");
        dates.push_back(row.date);
        s.values.push_back(row.value);
      }
      s.dates = std::move(dates);
    } else {
      for (const auto& row : rows_for_id) s.values.push_back(row.value);
    }
    validate_series(s);
    ds.series.push_back(std::move(s));
  }
  return ds;
}

void write_long_csv(const LabeledDataset& ds, const std::string& path,
                    const std::string& id_col, const std::string& date_col,
                    const std::string& value_col) {
  std::ostringstream out;
  const bool dated = !ds.series.empty() && ds.series.front().dates.has_value();
  out << csv_escape(id_col);
  if (dated) out << "," << csv_escape(date_col);
  out << "," << csv_escape(value_col) << "\n";
  out.precision(17);
  for (const auto& s : ds.series) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      out << csv_escape(s.id);
      if (dated) out << "," << format_iso_date((*s.dates)[i]);
      out << "," << s.values[i] << "\n";
    }
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << out.str();
}

LabeledDataset attach_labels(const LabeledDataset& ds, const std::string& path,
                             const std::string& id_col) {
  auto rows = read_csv(path);
  if (rows.empty()) throw SchemaError("file '" + path + "': empty");
  const auto& header = rows.front();
  const std::size_t id_idx = find_column(header, id_col, path);
  if (header.size() < 2)
    throw SchemaError("file '" + path + "': no task columns besides '" + id_col + "'");

  std::map<std::string, std::vector<std::string>> by_id;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw DataError("file '" + path + "', row " + std::to_string(r + 1) +
                      ": field count mismatch");
    by_id[row[id_idx]] = row;
  }

  for (const auto& [id, _] : by_id) {
    if (!ds.find(id)) throw DataError("label file '" + path + "': unknown series id '" + id + "'");
  }
  std::vector<std::string> uncovered;
  for (const auto& s : ds.series)
    if (!by_id.count(s.id)) uncovered.push_back(s.id);
  if (!uncovered.empty()) {
    std::string msg = "label file '" + path + "': no label for series";
    for (const auto& id : uncovered) msg += " '" + id + "'";
    throw CoverageError(msg);
  }

  LabeledDataset out = ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == id_idx) continue;
    std::vector<std::string> labels;
    labels.reserve(ds.series.size());
    for (const auto& s : ds.series) labels.push_back(by_id.at(s.id)[c]);
    out.tasks[header[c]] = std::move(labels);
  }
  validate_dataset(out);
  return out;
}

void write_feature_csv(const FeatureMatrix& m, const std::string& path) {
  std::ostringstream out;
  out << "series_id";
  for (const auto& f : m.feature_ids) out << "," << csv_escape(f.column_name());
  out << "\n";
  out.precision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << csv_escape(m.series_ids[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out << ",";
      const double v = m.values.at(r, c);
      if (!std::isnan(v)) out << v;
    }
    out << "\n";
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << out.str();
}

FeatureMatrix load_feature_csv(const std::string& path) {
  auto rows = read_csv(path);
  if (rows.empty()) throw SchemaError("file '" + path + "': empty");
  const auto& header = rows.front();
  if (header.empty() || header[0] != "series_id")
    throw SchemaError("file '" + path + "': first column must be series_id");
  FeatureMatrix m;
  for (std::size_t c = 1; c < header.size(); ++c) {
    FeatureId f;
    const auto at = header[c].rfind('@');
    if (at == std::string::npos) {
      f.name = header[c];
    } else {
      f.name = header[c].substr(0, at);
      f.level = level_from_name(header[c].substr(at + 1));
    }
    m.feature_ids.push_back(std::move(f));
  }
  m.values = Matrix(rows.size() - 1, header.size() - 1, kNaN);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw DataError("file '" + path + "', row " + std::to_string(r + 1) +
                      ": field count mismatch");
    m.series_ids.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c].empty()) continue;
      try {
        m.values.at(r - 1, c - 1) = std::stod(row[c]);
      } catch (const std::exception&) {
        throw DataError("file '" + path + "', row " + std::to_string(r + 1) +
                        ": bad numeric cell '" + row[c] + "'");
      }
    }
  }
  return m;
}

}  // namespace tsrep
