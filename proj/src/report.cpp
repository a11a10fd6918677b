#include "tsrep/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tsrep/csv.hpp"
#include "tsrep/demand.hpp"
#include "tsrep/svg.hpp"

namespace tsrep {

const char* kToolVersion = "0.1.0";

namespace {

namespace fs = std::filesystem;

std::string levels_to_string(const std::vector<Level>& levels) {
  std::string out;
  for (const auto& l : levels) {
    if (!out.empty()) out += ",";
    out += level_name(l);
  }
  return out;
}

std::vector<Level> levels_from_string(const std::string& s) {
  std::vector<Level> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(level_from_name(tok));
  if (out.empty()) throw ParamError("no aggregation levels given");
  return out;
}

class StageTimer {
 public:
  explicit StageTimer(nlohmann::json& timings) : timings_(timings) {}
  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto out = fn();
      record(stage, start);
      return out;
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    timings_[stage] = ms;
  }
  nlohmann::json& timings_;
};

nlohmann::json audit_to_json(const CascadeAudit& audit) {
  nlohmann::json j;
  j["input_features"] = audit.input_features;
  j["dropped_missing"] = audit.dropped_missing;
  j["dropped_constant"] = audit.dropped_constant;
  j["after_prefilter"] = audit.after_prefilter;
  j["dropped_stage1"] = audit.dropped_stage1;
  j["after_stage1"] = audit.after_stage1;
  j["dropped_stage3"] = audit.dropped_stage3;
  j["selected"] = audit.selected;
  nlohmann::json pvals = nlohmann::json::array();
  for (const auto& rec : audit.pvalues) {
    nlohmann::json e;
    e["feature"] = rec.feature.column_name();
    e["task_pvalues"] = rec.task_pvalues;
    e["combined_p"] = rec.combined_p;
    pvals.push_back(e);
  }
  j["pvalues"] = pvals;
  nlohmann::json quals = nlohmann::json::array();
  for (const auto& qv : audit.qualities) {
    nlohmann::json e;
    e["feature"] = qv.feature.column_name();
    e["weights"] = qv.weights;
    e["mean_quality"] = qv.mean_quality;
    quals.push_back(e);
  }
  j["qualities"] = quals;
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : audit.clusters) {
    nlohmann::json e;
    e["representative"] = c.representative.column_name();
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : c.members) members.push_back(m.column_name());
    e["members"] = members;
    clusters.push_back(e);
  }
  j["clusters"] = clusters;
  return j;
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc | std::ios::binary);
    if (!f) throw IoError("cannot write '" + tmp + "'");
    f << content;
    if (!f.good()) throw IoError("short write to '" + tmp + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  nlohmann::json datasets = nlohmann::json::array();
  for (const auto& d : cfg.datasets) {
    nlohmann::json e;
    e["tag"] = d.tag;
    e["path"] = d.path;
    e["labels"] = d.labels_path;
    datasets.push_back(e);
  }
  j["datasets"] = datasets;
  j["id_col"] = cfg.id_col;
  j["date_col"] = cfg.date_col;
  j["value_col"] = cfg.value_col;
  j["frequency"] = cfg.frequency;
  j["levels"] = levels_to_string(cfg.levels);
  j["validation_catalog_only"] = cfg.validation_catalog_only;
  j["holdout"] = cfg.holdout;
  j["target_kind"] = cfg.target_kind == TargetKind::mase ? "mase" : "raw_forecast";
  j["alpha"] = cfg.alpha;
  j["k_neighbors"] = cfg.k_neighbors;
  j["cluster_threshold"] = cfg.cluster_threshold;
  j["cluster_on"] = cfg.cluster_on == ClusterInput::quality ? "quality" : "values";
  j["perplexity"] = cfg.embedding.perplexity;
  j["iterations"] = cfg.embedding.iterations;
  j["grid_n"] = cfg.grid_n;
  j["joint_grid"] = cfg.joint_grid;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out_dir"] = cfg.out_dir;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  if (j.contains("datasets")) {
    for (const auto& e : j.at("datasets")) {
      DatasetSpec d;
      d.tag = e.value("tag", "");
      d.path = e.value("path", "");
      d.labels_path = e.value("labels", "");
      cfg.datasets.push_back(d);
    }
  }
  cfg.id_col = j.value("id_col", cfg.id_col);
  cfg.date_col = j.value("date_col", cfg.date_col);
  cfg.value_col = j.value("value_col", cfg.value_col);
  cfg.frequency = j.value("frequency", cfg.frequency);
  if (j.contains("levels")) cfg.levels = levels_from_string(j.at("levels").get<std::string>());
  cfg.validation_catalog_only = j.value("validation_catalog_only", false);
  cfg.holdout = j.value("holdout", cfg.holdout);
  if (j.value("target_kind", "mase") == std::string("raw_forecast"))
    cfg.target_kind = TargetKind::raw_forecast;
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.k_neighbors = j.value("k_neighbors", cfg.k_neighbors);
  cfg.cluster_threshold = j.value("cluster_threshold", cfg.cluster_threshold);
  if (j.value("cluster_on", "quality") == std::string("values"))
    cfg.cluster_on = ClusterInput::values;
  cfg.embedding.perplexity = j.value("perplexity", cfg.embedding.perplexity);
  cfg.embedding.iterations = j.value("iterations", cfg.embedding.iterations);
  cfg.grid_n = j.value("grid_n", cfg.grid_n);
  cfg.joint_grid = j.value("joint_grid", false);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  return cfg;
}

PipelineResult run_pipeline(const RunConfig& cfg, bool emit_files) {
  if (cfg.datasets.empty()) throw ParamError("pipeline: no datasets configured");
  std::vector<std::pair<std::string, LabeledDataset>> datasets;
  for (const auto& spec : cfg.datasets) {
    LabeledDataset ds =
        load_long_csv(spec.path, cfg.id_col, cfg.date_col, cfg.value_col, cfg.frequency);
    if (!spec.labels_path.empty()) ds = attach_labels(ds, spec.labels_path, cfg.id_col);
    datasets.emplace_back(spec.tag, std::move(ds));
  }
  return run_pipeline(cfg, datasets, emit_files);
}

PipelineResult run_pipeline(const RunConfig& cfg,
                            const std::vector<std::pair<std::string, LabeledDataset>>& datasets,
                            bool emit_files) {
  if (datasets.empty()) throw ParamError("pipeline: no datasets");
  const auto& reference = datasets.front().second;
  if (reference.tasks.empty())
    throw PipelineError(
        "pipeline: the first (reference) dataset needs label tasks for the selection cascade");

  nlohmann::json report;
  report["tool"] = {{"name", "tsrep"}, {"version", kToolVersion}};
  report["config"] = config_to_json(cfg);
  nlohmann::json timings;
  StageTimer timer(timings);

  // demand profiles
  nlohmann::json profiles;
  timer.run("profile", [&] {
    for (const auto& [tag, ds] : datasets) {
      nlohmann::json p;
      for (const auto& [cls, pct] : profile(ds)) p[demand_class_name(cls)] = pct;
      profiles[tag] = p;
    }
  });
  report["demand_profiles"] = profiles;

  // feature extraction
  const std::vector<FeatureId> catalog =
      cfg.validation_catalog_only ? validation_catalog() : full_catalog();
  std::vector<FeatureMatrix> matrices;
  timer.run("extract", [&] {
    nlohmann::json extract_info;
    for (const auto& [tag, ds] : datasets) {
      matrices.push_back(extract_matrix(ds, catalog, cfg.levels, cfg.threads));
      std::size_t missing = 0;
      for (double v : matrices.back().values.data)
        if (std::isnan(v)) ++missing;
      extract_info[tag] = {{"rows", matrices.back().rows()},
                           {"cols", matrices.back().cols()},
                           {"missing_cells", missing}};
    }
    report["extract"] = extract_info;
  });

  // benchmark targets for the reference dataset
  TargetBank targets = timer.run("targets", [&] {
    return make_targets(reference, cfg.holdout, cfg.target_kind, cfg.threads);
  });
  report["targets"] = {{"series_with_targets", targets.series_ids.size()},
                       {"excluded_series", targets.excluded_ids.size()}};

  // selection cascade on the reference dataset
  CascadeOptions cascade_opts;
  cascade_opts.alpha = cfg.alpha;
  cascade_opts.relieff.k_neighbors = cfg.k_neighbors;
  cascade_opts.cluster_threshold = cfg.cluster_threshold;
  cascade_opts.cluster_on = cfg.cluster_on;
  cascade_opts.threads = cfg.threads;
  CascadeResult cascade = timer.run(
      "select", [&] { return run_cascade(matrices.front(), reference, targets, cascade_opts); });
  report["selection"] = audit_to_json(cascade.audit);

  // joint embedding over the selected features
  Embedding2D embedding = timer.run("embed", [&] {
    std::vector<std::size_t> selected_cols;
    for (std::size_t c = 0; c < catalog.size(); ++c) {
      const bool selected =
          std::any_of(cascade.selected.begin(), cascade.selected.end(),
                      [&](const FeatureId& f) { return f == catalog[c]; });
      if (!selected) continue;
      bool missing = false;
      for (const auto& m : matrices) {
        for (std::size_t r = 0; r < m.rows() && !missing; ++r)
          if (std::isnan(m.values.at(r, c))) missing = true;
        if (missing) break;
      }
      if (!missing) selected_cols.push_back(c);
    }
    if (selected_cols.empty())
      throw PipelineError("embedding: no selected feature is complete across all datasets");

    FeatureMatrix joint;
    std::size_t total_rows = 0;
    for (const auto& m : matrices) total_rows += m.rows();
    joint.values = Matrix(total_rows, selected_cols.size());
    std::vector<std::string> tags;
    std::size_t row = 0;
    for (std::size_t d = 0; d < matrices.size(); ++d) {
      for (std::size_t r = 0; r < matrices[d].rows(); ++r, ++row) {
        joint.series_ids.push_back(matrices[d].series_ids[r]);
        tags.push_back(datasets[d].first);
        for (std::size_t j = 0; j < selected_cols.size(); ++j)
          joint.values.at(row, j) = matrices[d].values.at(r, selected_cols[j]);
      }
    }
    for (std::size_t j = 0; j < selected_cols.size(); ++j)
      joint.feature_ids.push_back(catalog[selected_cols[j]]);
    joint = zscore(prefilter(joint));

    TsneConfig tcfg = cfg.embedding;
    tcfg.seed = derive_seed(cfg.seed, 5);
    Embedding2D e = tsne(joint.values, tcfg);
    e.series_ids = joint.series_ids;
    e.dataset_tags = tags;
    return e;
  });
  {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [iter, kl] : embedding.kl_trace) trace.push_back({{"iter", iter}, {"kl", kl}});
    report["embedding"] = {{"points", embedding.x.size()}, {"kl_trace", trace}};
  }

  // pairwise coverage
  timer.run("coverage", [&] {
    nlohmann::json pairs = nlohmann::json::array();
    std::map<std::string, std::vector<Point2D>> points_by_tag;
    for (std::size_t i = 0; i < embedding.x.size(); ++i)
      points_by_tag[embedding.dataset_tags[i]].push_back({embedding.x[i], embedding.y[i]});

    std::vector<Point2D> all_points;
    if (cfg.joint_grid)
      for (const auto& [tag, pts] : points_by_tag)
        all_points.insert(all_points.end(), pts.begin(), pts.end());

    for (std::size_t a = 0; a < datasets.size(); ++a) {
      for (std::size_t b = a + 1; b < datasets.size(); ++b) {
        const std::string& tag_a = datasets[a].first;
        const std::string& tag_b = datasets[b].first;
        Grid g = build_grid(points_by_tag[tag_a], points_by_tag[tag_b], cfg.grid_n, tag_a, tag_b);
        if (cfg.joint_grid) {
          // widen the bounds to the union of all datasets and recount
          double x_lo = all_points[0].x, x_hi = all_points[0].x;
          double y_lo = all_points[0].y, y_hi = all_points[0].y;
          for (const auto& p : all_points) {
            x_lo = std::min(x_lo, p.x);
            x_hi = std::max(x_hi, p.x);
            y_lo = std::min(y_lo, p.y);
            y_hi = std::max(y_hi, p.y);
          }
          g.x_lo = x_lo - (x_hi - x_lo) * 1e-9;
          g.x_hi = x_hi + (x_hi - x_lo) * 1e-9;
          g.y_lo = y_lo - (y_hi - y_lo) * 1e-9;
          g.y_hi = y_hi + (y_hi - y_lo) * 1e-9;
          std::fill(g.counts_a.begin(), g.counts_a.end(), 0);
          std::fill(g.counts_b.begin(), g.counts_b.end(), 0);
          for (const auto& p : points_by_tag[tag_a]) g.counts_a[g.cell_index(p.x, p.y)]++;
          for (const auto& p : points_by_tag[tag_b]) g.counts_b[g.cell_index(p.x, p.y)]++;
        }
        const CoverageReport r = coverage_report(g);
        pairs.push_back({{"a", r.tag_a},
                         {"b", r.tag_b},
                         {"miscoverage_ab", r.miscoverage_ab},
                         {"miscoverage_ba", r.miscoverage_ba},
                         {"nor_ab", r.nor_ab},
                         {"nor_ba", r.nor_ba},
                         {"occupied_a", r.occupied_a},
                         {"occupied_b", r.occupied_b}});
      }
    }
    report["coverage"] = pairs;
  });

  report["timings_ms"] = timings;

  PipelineResult result;
  result.report = std::move(report);
  result.embedding = std::move(embedding);

  if (emit_files) {
    fs::create_directories(cfg.out_dir);
    write_atomic((fs::path(cfg.out_dir) / "report.json").string(), result.report.dump(2) + "\n");
    {
      std::ostringstream csv;
      csv << "series_id,dataset_tag,dim1,dim2\n";
      csv.precision(17);
      for (std::size_t i = 0; i < result.embedding.x.size(); ++i)
        csv << csv_escape(result.embedding.series_ids[i]) << ","
            << csv_escape(result.embedding.dataset_tags[i]) << "," << result.embedding.x[i]
            << "," << result.embedding.y[i] << "\n";
      write_atomic((fs::path(cfg.out_dir) / "embedding.csv").string(), csv.str());
    }
    render_scatter(result.embedding, (fs::path(cfg.out_dir) / "instance_space").string());
  }
  return result;
}

}  // namespace tsrep
