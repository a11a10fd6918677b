#pragma once

#include <string>
#include <vector>

#include "tsrep/features.hpp"
#include "tsrep/series.hpp"

namespace tsrep {

// Long-format sales CSV: header row, UTF-8, ISO-8601 dates. Column names are
// configurable. `date_col` may be empty, in which case rows are taken in file
// order and the series carry no dates.
LabeledDataset load_long_csv(const std::string& path, const std::string& id_col,
                             const std::string& date_col, const std::string& value_col,
                             int frequency = 7);

void write_long_csv(const LabeledDataset& ds, const std::string& path,
                    const std::string& id_col = "id", const std::string& date_col = "date",
                    const std::string& value_col = "value");

// Label CSV: id column plus one column per task. Every dataset id must be
// covered; unknown ids are rejected.
LabeledDataset attach_labels(const LabeledDataset& ds, const std::string& path,
                             const std::string& id_col = "id");

// FeatureMatrix CSV: first column series_id, header "name@level",
// missing cells written as empty fields.
void write_feature_csv(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_feature_csv(const std::string& path);

// Minimal CSV primitives (quoted fields with embedded commas/quotes allowed).
std::vector<std::vector<std::string>> read_csv(const std::string& path);
std::string csv_escape(const std::string& field);

}  // namespace tsrep
