#include "tsrep/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "tsrep/stats.hpp"

namespace tsrep {

FeatureMatrix prefilter(const FeatureMatrix& m, std::vector<FeatureId>* dropped_missing,
                        std::vector<FeatureId>* dropped_constant) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    bool missing = false;
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (std::isnan(m.values.at(r, c))) {
        missing = true;
        break;
      }
    if (missing) {
      if (dropped_missing) dropped_missing->push_back(m.feature_ids[c]);
      continue;
    }
    bool constant = true;
    for (std::size_t r = 1; r < m.rows(); ++r)
      if (m.values.at(r, c) != m.values.at(0, c)) {
        constant = false;
        break;
      }
    if (constant) {
      if (dropped_constant) dropped_constant->push_back(m.feature_ids[c]);
      continue;
    }
    keep.push_back(c);
  }
  if (keep.empty()) throw PipelineError("prefilter: no features survive");
  FeatureMatrix out;
  out.series_ids = m.series_ids;
  out.values = Matrix(m.rows(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.feature_ids.push_back(m.feature_ids[keep[j]]);
    for (std::size_t r = 0; r < m.rows(); ++r) out.values.at(r, j) = m.values.at(r, keep[j]);
  }
  return out;
}

FeatureMatrix zscore(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::vector<double> col = m.values.column(c);
    const double mu = mean_of(col);
    const double sd = std::sqrt(sample_variance(col));
    if (!(sd > 0.0))
      throw PipelineError("zscore: zero-variance column '" + m.feature_ids[c].column_name() +
                          "'");
    for (std::size_t r = 0; r < m.rows(); ++r)
      out.values.at(r, c) = (m.values.at(r, c) - mu) / sd;
  }
  return out;
}

double kruskal_wallis(const std::vector<double>& values, const std::vector<std::string>& labels) {
  if (values.size() != labels.size() || values.empty())
    throw ParamError("kruskal_wallis: values/labels mismatch");
  std::map<std::string, std::size_t> group_sizes;
  for (const auto& l : labels) group_sizes[l] += 1;
  if (group_sizes.size() < 2) throw ParamError("kruskal_wallis: need at least 2 classes");

  const std::size_t n = values.size();
  const std::vector<double> ranks = mid_ranks(values);

  std::map<std::string, double> rank_sums;
  for (std::size_t i = 0; i < n; ++i) rank_sums[labels[i]] += ranks[i];

  double h = 0.0;
  for (const auto& [label, sum] : rank_sums)
    h += sum * sum / static_cast<double>(group_sizes[label]);
  h = 12.0 / (static_cast<double>(n) * (n + 1.0)) * h - 3.0 * (n + 1.0);

  // tie correction
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }
  const double correction = 1.0 - tie_sum / (static_cast<double>(n) * n * n - n);
  if (correction <= 0.0) return 1.0;  // all values identical
  h /= correction;

  return chi2_survival(h, static_cast<double>(group_sizes.size()) - 1.0);
}

double fisher_combine(const std::vector<double>& pvalues) {
  if (pvalues.empty()) throw ParamError("fisher_combine: empty input");
  double x = 0.0;
  for (double p : pvalues) {
    if (p > 1.0 || std::isnan(p)) throw ParamError("fisher_combine: p-value outside (0, 1]");
    x += std::log(std::max(p, 1e-300));
  }
  x *= -2.0;
  return chi2_survival(x, 2.0 * static_cast<double>(pvalues.size()));
}

std::vector<bool> holm_bonferroni(const std::vector<double>& pvalues, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) throw ParamError("holm_bonferroni: alpha outside (0, 1)");
  const std::size_t n = pvalues.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
  std::vector<bool> keep(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const double threshold = alpha / static_cast<double>(n - j);
    if (pvalues[order[j]] > threshold) break;
    keep[order[j]] = true;
  }
  return keep;
}

// ---------------------------------------------------------------------------
// RReliefF

namespace {

struct NormalizedColumns {
  Matrix normalized;          // diff-ready values: |a - b| is the diff contribution
  std::vector<bool> usable;   // false for constant columns (diff identically 0)
};

NormalizedColumns minmax_normalize(const Matrix& m) {
  NormalizedColumns out;
  out.normalized = Matrix(m.rows, m.cols, 0.0);
  out.usable.assign(m.cols, false);
  for (std::size_t c = 0; c < m.cols; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m.rows; ++r) {
      const double v = m.at(r, c);
      if (!std::isfinite(v)) throw ParamError("rrelieff: non-finite feature value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi > lo) {
      out.usable[c] = true;
      for (std::size_t r = 0; r < m.rows; ++r)
        out.normalized.at(r, c) = (m.at(r, c) - lo) / (hi - lo);
    }
  }
  return out;
}

}  // namespace

std::vector<double> rrelieff(const Matrix& features, const std::vector<double>& target,
                             const RreliefOptions& opts) {
  const std::size_t n = features.rows;
  const std::size_t p = features.cols;
  if (target.size() != n) throw ParamError("rrelieff: target length mismatch");
  const std::size_t k = static_cast<std::size_t>(opts.k_neighbors);
  if (k < 1 || n < k + 1) throw ParamError("rrelieff: need at least k_neighbors + 1 rows");

  const NormalizedColumns norm = minmax_normalize(features);

  double t_lo = *std::min_element(target.begin(), target.end());
  double t_hi = *std::max_element(target.begin(), target.end());
  for (double t : target)
    if (!std::isfinite(t)) throw ParamError("rrelieff: non-finite target value");
  if (!(t_hi > t_lo)) throw ParamError("rrelieff: constant target, no prediction differences");

  const std::size_t samples = opts.sample > 0 ? std::min<std::size_t>(opts.sample, n) : n;

  // pre-normalized exponential rank weights, sum 1 over the k neighbors
  std::vector<double> rank_weight(k);
  double wsum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double u = static_cast<double>(j + 1) / opts.rank_sigma;
    rank_weight[j] = std::exp(-u * u);
    wsum += rank_weight[j];
  }
  for (double& w : rank_weight) w /= wsum;

  double n_dp = 0.0;
  std::vector<double> n_df(p, 0.0), n_dpdf(p, 0.0);
  std::vector<std::pair<double, std::size_t>> dist(n);

  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0.0;
      if (j != i) {
        for (std::size_t c = 0; c < p; ++c)
          d += std::fabs(norm.normalized.at(i, c) - norm.normalized.at(j, c));
      }
      dist[j] = {d, j};
    }
    dist[i].first = std::numeric_limits<double>::infinity();  // exclude self
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t nb = dist[j].second;
      const double w = rank_weight[j];
      const double diff_p = std::fabs(target[i] - target[nb]) / (t_hi - t_lo);
      n_dp += diff_p * w;
      for (std::size_t c = 0; c < p; ++c) {
        if (!norm.usable[c]) continue;
        const double diff_f =
            std::fabs(norm.normalized.at(i, c) - norm.normalized.at(nb, c)) * w;
        n_df[c] += diff_f;
        n_dpdf[c] += diff_p * diff_f;
      }
    }
  }

  if (n_dp <= 0.0) throw ParamError("rrelieff: no prediction differences among neighbors");
  const double m_total = static_cast<double>(samples);
  std::vector<double> weights(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    if (!norm.usable[c]) continue;  // constant feature: weight stays 0
    weights[c] = n_dpdf[c] / n_dp - (n_df[c] - n_dpdf[c]) / (m_total - n_dp);
  }
  return weights;
}

std::vector<QualityVector> quality_matrix(const FeatureMatrix& m,
                                          const std::vector<std::vector<double>>& targets,
                                          const RreliefOptions& opts, int threads) {
  if (targets.empty()) throw ParamError("quality_matrix: no targets");
  std::vector<std::vector<double>> per_target(targets.size());
  parallel_for(targets.size(), threads, [&](std::size_t t) {
    per_target[t] = rrelieff(m.values, targets[t], opts);
  });
  std::vector<QualityVector> out(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    out[c].feature = m.feature_ids[c];
    out[c].weights.resize(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) out[c].weights[t] = per_target[t][c];
    out[c].mean_quality = mean_of(out[c].weights);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Redundancy clustering

namespace {

// Deterministic identity of a cluster for tie-breaking: its smallest column
// name (names are unique within a catalog).
std::string cluster_key(const std::vector<std::size_t>& members,
                        const std::vector<QualityVector>& qvs) {
  std::string best = qvs[members.front()].feature.column_name();
  for (std::size_t m : members) best = std::min(best, qvs[m].feature.column_name());
  return best;
}

}  // namespace

std::vector<FeatureCluster> redundancy_cluster(
    const std::vector<QualityVector>& qvs, double threshold,
    const std::vector<std::vector<double>>* value_vectors) {
  if (qvs.empty()) return {};
  const std::size_t n = qvs.size();
  if (value_vectors && value_vectors->size() != n)
    throw ParamError("redundancy_cluster: value vector count mismatch");

  // pairwise correlation distance; constant vectors never merge
  Matrix dist(n, n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto& va = value_vectors ? (*value_vectors)[a] : qvs[a].weights;
      const auto& vb = value_vectors ? (*value_vectors)[b] : qvs[b].weights;
      const double r = pearson(va, vb);
      const double d = std::isnan(r) ? std::numeric_limits<double>::infinity() : 1.0 - r;
      dist.at(a, b) = d;
      dist.at(b, a) = d;
    }
  }

  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});

  while (clusters.size() > 1) {
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0, best_b = 0;
    std::string best_ka, best_kb;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double d = 0.0;  // complete linkage: max member distance
        for (std::size_t ma : clusters[a])
          for (std::size_t mb : clusters[b]) d = std::max(d, dist.at(ma, mb));
        if (d > threshold) continue;
        std::string ka = cluster_key(clusters[a], qvs);
        std::string kb = cluster_key(clusters[b], qvs);
        if (kb < ka) std::swap(ka, kb);
        const bool better =
            d < best_d || (d == best_d && (ka < best_ka || (ka == best_ka && kb < best_kb)));
        if (better) {
          best_d = d;
          best_a = a;
          best_b = b;
          best_ka = ka;
          best_kb = kb;
        }
      }
    }
    if (!std::isfinite(best_d)) break;  // nothing mergeable at this threshold
    auto merged = clusters[best_a];
    merged.insert(merged.end(), clusters[best_b].begin(), clusters[best_b].end());
    clusters.erase(clusters.begin() + best_b);
    clusters[best_a] = std::move(merged);
  }

  std::vector<FeatureCluster> out;
  for (auto& members : clusters) {
    FeatureCluster fc;
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return qvs[a].feature.column_name() < qvs[b].feature.column_name();
    });
    std::size_t rep = members.front();
    for (std::size_t m : members) {
      if (qvs[m].mean_quality > qvs[rep].mean_quality) rep = m;
    }
    for (std::size_t m : members) fc.members.push_back(qvs[m].feature);
    fc.representative = qvs[rep].feature;
    out.push_back(std::move(fc));
  }
  std::sort(out.begin(), out.end(), [](const FeatureCluster& a, const FeatureCluster& b) {
    return a.members.front().column_name() < b.members.front().column_name();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Cascade

CascadeResult run_cascade(const FeatureMatrix& m, const LabeledDataset& ds,
                          const TargetBank& targets, const CascadeOptions& opts) {
  if (ds.tasks.empty()) throw PipelineError("cascade: dataset has no classification tasks");
  if (m.rows() != ds.series.size())
    throw ParamError("cascade: feature matrix rows do not match dataset");

  CascadeResult result;
  CascadeAudit& audit = result.audit;
  audit.input_features = m.cols();

  std::vector<FeatureId> dropped_missing, dropped_constant;
  FeatureMatrix filtered = prefilter(m, &dropped_missing, &dropped_constant);
  audit.dropped_missing = dropped_missing.size();
  audit.dropped_constant = dropped_constant.size();
  audit.after_prefilter = filtered.cols();

  FeatureMatrix standardized = zscore(filtered);

  // stage 1: per-task Kruskal-Wallis, Fisher combination, Holm-Bonferroni
  std::vector<double> combined(standardized.cols());
  audit.pvalues.resize(standardized.cols());
  parallel_for(standardized.cols(), opts.threads, [&](std::size_t c) {
    PValueRecord rec;
    rec.feature = standardized.feature_ids[c];
    const std::vector<double> col = standardized.values.column(c);
    for (const auto& [task, labels] : ds.tasks)
      rec.task_pvalues.push_back(kruskal_wallis(col, labels));
    rec.combined_p = fisher_combine(rec.task_pvalues);
    combined[c] = rec.combined_p;
    audit.pvalues[c] = std::move(rec);
  });
  const std::vector<bool> keep = holm_bonferroni(combined, opts.alpha);

  std::vector<std::size_t> kept_cols;
  for (std::size_t c = 0; c < keep.size(); ++c)
    if (keep[c]) kept_cols.push_back(c);
  audit.after_stage1 = kept_cols.size();
  audit.dropped_stage1 = standardized.cols() - kept_cols.size();
  if (kept_cols.empty())
    throw PipelineError("cascade stage 1 (statistical pre-filtering): no features survive");

  FeatureMatrix survivors;
  survivors.series_ids = standardized.series_ids;
  survivors.values = Matrix(standardized.rows(), kept_cols.size());
  for (std::size_t j = 0; j < kept_cols.size(); ++j) {
    survivors.feature_ids.push_back(standardized.feature_ids[kept_cols[j]]);
    for (std::size_t r = 0; r < standardized.rows(); ++r)
      survivors.values.at(r, j) = standardized.values.at(r, kept_cols[j]);
  }

  // stage 2: RReliefF quality against the benchmark targets, on the rows the
  // target bank retained
  std::vector<std::size_t> target_rows;
  {
    std::map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < survivors.series_ids.size(); ++r)
      row_of[survivors.series_ids[r]] = r;
    for (const auto& id : targets.series_ids) {
      auto it = row_of.find(id);
      if (it != row_of.end()) target_rows.push_back(it->second);
    }
  }
  if (target_rows.size() < static_cast<std::size_t>(opts.relieff.k_neighbors) + 1)
    throw PipelineError("cascade stage 2 (performance evaluation): too few target rows");

  FeatureMatrix stage2;
  stage2.feature_ids = survivors.feature_ids;
  stage2.values = Matrix(target_rows.size(), survivors.cols());
  for (std::size_t i = 0; i < target_rows.size(); ++i) {
    stage2.series_ids.push_back(survivors.series_ids[target_rows[i]]);
    for (std::size_t c = 0; c < survivors.cols(); ++c)
      stage2.values.at(i, c) = survivors.values.at(target_rows[i], c);
  }
  std::vector<std::vector<double>> target_columns;
  {
    std::map<std::string, std::size_t> bank_row;
    for (std::size_t r = 0; r < targets.series_ids.size(); ++r)
      bank_row[targets.series_ids[r]] = r;
    for (std::size_t t = 0; t < targets.values.cols; ++t) {
      std::vector<double> col;
      col.reserve(stage2.series_ids.size());
      for (const auto& id : stage2.series_ids)
        col.push_back(targets.values.at(bank_row.at(id), t));
      target_columns.push_back(std::move(col));
    }
  }
  audit.qualities = quality_matrix(stage2, target_columns, opts.relieff, opts.threads);

  // stage 3: redundancy minimization
  std::vector<std::vector<double>> value_vectors;
  const std::vector<std::vector<double>>* value_ptr = nullptr;
  if (opts.cluster_on == ClusterInput::values) {
    for (std::size_t c = 0; c < stage2.cols(); ++c)
      value_vectors.push_back(stage2.values.column(c));
    value_ptr = &value_vectors;
  }
  audit.clusters = redundancy_cluster(audit.qualities, opts.cluster_threshold, value_ptr);
  for (const auto& cluster : audit.clusters) result.selected.push_back(cluster.representative);
  audit.selected = result.selected.size();
  audit.dropped_stage3 = audit.after_stage1 - audit.selected;
  if (result.selected.empty())
    throw PipelineError("cascade stage 3 (redundancy minimization): no features survive");
  return result;
}

}  // namespace tsrep
