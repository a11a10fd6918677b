#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsrep/benchmarks.hpp"
#include "tsrep/common.hpp"
#include "tsrep/features.hpp"
#include "tsrep/series.hpp"

namespace tsrep {

// Drops every column containing a missing value and every constant column.
FeatureMatrix prefilter(const FeatureMatrix& m, std::vector<FeatureId>* dropped_missing = nullptr,
                        std::vector<FeatureId>* dropped_constant = nullptr);

// Column-wise standardization to mean 0, sample standard deviation 1.
FeatureMatrix zscore(const FeatureMatrix& m);

// Kruskal-Wallis p-value (mid-rank ties, tie correction, chi-squared
// approximation at classes-1 degrees of freedom). All-identical values give
// p = 1.
double kruskal_wallis(const std::vector<double>& values, const std::vector<std::string>& labels);

// Fisher's method: X = -2 sum ln p_i, combined p from the chi-squared
// survival function at 2k degrees of freedom. p = 0 is clamped to 1e-300.
double fisher_combine(const std::vector<double>& pvalues);

// Step-down Holm-Bonferroni keep mask at level alpha: hypotheses ranked
// before the first p_(j) > alpha/(n+1-j) are kept.
std::vector<bool> holm_bonferroni(const std::vector<double>& pvalues, double alpha = 0.05);

// RReliefF feature weights for a regression target. Manhattan distance on
// min-max-normalized features, k nearest neighbors per sampled instance,
// exponential distance-rank weighting exp(-(rank/sigma)^2) normalized per
// instance. sample = 0 uses every row.
struct RreliefOptions {
  int k_neighbors = 10;
  int sample = 0;
  double rank_sigma = 20.0;
};
std::vector<double> rrelieff(const Matrix& features, const std::vector<double>& target,
                             const RreliefOptions& opts = {});

struct PValueRecord {
  FeatureId feature;
  std::vector<double> task_pvalues;
  double combined_p = 1.0;
};

struct QualityVector {
  FeatureId feature;
  std::vector<double> weights;  // one RReliefF weight per regression target
  double mean_quality = 0.0;
};

// One QualityVector per feature column, weights aligned with `targets`.
std::vector<QualityVector> quality_matrix(const FeatureMatrix& m,
                                          const std::vector<std::vector<double>>& targets,
                                          const RreliefOptions& opts = {}, int threads = 0);

struct FeatureCluster {
  std::vector<FeatureId> members;
  FeatureId representative;  // largest mean quality; ties to smallest name
};

// Complete-linkage agglomerative clustering of quality vectors under the
// correlation distance d = 1 - pearson, cut at `threshold`. Features with a
// constant quality vector form singleton clusters. Optional `value_vectors`
// switches the distance to cross-series feature-value correlation.
std::vector<FeatureCluster> redundancy_cluster(
    const std::vector<QualityVector>& qvs, double threshold = 0.2,
    const std::vector<std::vector<double>>* value_vectors = nullptr);

enum class ClusterInput { quality, values };

struct CascadeOptions {
  double alpha = 0.05;
  RreliefOptions relieff;
  double cluster_threshold = 0.2;
  ClusterInput cluster_on = ClusterInput::quality;
  int threads = 0;
};

struct CascadeAudit {
  std::size_t input_features = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_constant = 0;
  std::size_t after_prefilter = 0;
  std::vector<PValueRecord> pvalues;
  std::size_t dropped_stage1 = 0;
  std::size_t after_stage1 = 0;
  std::vector<QualityVector> qualities;
  std::vector<FeatureCluster> clusters;
  std::size_t dropped_stage3 = 0;
  std::size_t selected = 0;
};

struct CascadeResult {
  std::vector<FeatureId> selected;
  CascadeAudit audit;
};

// Full three-stage cascade: prefilter + z-score, per-task Kruskal-Wallis
// combined by Fisher's method and filtered by Holm-Bonferroni, RReliefF
// quality against the benchmark targets, complete-linkage redundancy
// clustering. Throws PipelineError naming the stage that emptied the set.
CascadeResult run_cascade(const FeatureMatrix& m, const LabeledDataset& ds,
                          const TargetBank& targets, const CascadeOptions& opts = {});

}  // namespace tsrep
