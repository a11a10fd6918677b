#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsrep/benchmarks.hpp"
#include "tsrep/coverage.hpp"
#include "tsrep/embedding.hpp"
#include "tsrep/selection.hpp"
#include "tsrep/series.hpp"

namespace tsrep {

extern const char* kToolVersion;

struct DatasetSpec {
  std::string tag;
  std::string path;
  std::string labels_path;  // empty when none
};

// Full run configuration; serialized into the report so a run can be
// replayed bit-for-bit.
struct RunConfig {
  std::vector<DatasetSpec> datasets;
  std::string id_col = "id";
  std::string date_col = "date";
  std::string value_col = "value";
  int frequency = 7;
  std::vector<Level> levels = {Level::daily, Level::weekly, Level::monthly};
  bool validation_catalog_only = false;
  int holdout = 0;  // 0: level default
  TargetKind target_kind = TargetKind::mase;
  double alpha = 0.05;
  int k_neighbors = 10;
  double cluster_threshold = 0.2;
  ClusterInput cluster_on = ClusterInput::quality;
  TsneConfig embedding;
  int grid_n = 30;
  bool joint_grid = false;  // one grid over all datasets instead of per pair
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = ".";
};

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

struct PipelineResult {
  nlohmann::json report;
  Embedding2D embedding;
};

// The end-to-end pipeline behind `report`: load, profile, extract, targets,
// cascade on the first (reference) dataset, joint embedding, pairwise
// coverage. Writes report.json, embedding.csv and scatter SVGs into
// cfg.out_dir. `emit_files = false` computes the report only.
PipelineResult run_pipeline(const RunConfig& cfg, bool emit_files = true);

// Also usable on pre-loaded datasets (tag -> dataset, order preserved).
PipelineResult run_pipeline(const RunConfig& cfg,
                            const std::vector<std::pair<std::string, LabeledDataset>>& datasets,
                            bool emit_files);

// Writes content to path atomically (temp file + rename).
void write_atomic(const std::string& path, const std::string& content);

}  // namespace tsrep
