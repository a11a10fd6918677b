#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tsrep/csv.hpp"
#include "tsrep/demand.hpp"
#include "tsrep/report.hpp"
#include "tsrep/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  tsrep::RunConfig cfg;
};

std::vector<tsrep::Level> parse_levels(const std::string& s) {
  std::vector<tsrep::Level> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(tsrep::level_from_name(tok));
  if (out.empty()) throw tsrep::ParamError("--levels: no levels given");
  return out;
}

// "tag=path" pairs for multi-dataset flags
std::pair<std::string, std::string> parse_tagged(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
    throw tsrep::ParamError(std::string(flag) + ": expected tag=path, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

void require_file(const std::string& path, const std::string& hint) {
  if (!fs::exists(path))
    throw tsrep::IoError("missing input '" + path + "'; " + hint);
}

tsrep::LabeledDataset load_dataset(const tsrep::RunConfig& cfg, const std::string& path,
                                   const std::string& labels_path) {
  require_file(path, "provide a long-format sales CSV");
  auto ds = tsrep::load_long_csv(path, cfg.id_col, cfg.date_col, cfg.value_col, cfg.frequency);
  if (!labels_path.empty()) {
    require_file(labels_path, "provide a label CSV (id column plus task columns)");
    ds = tsrep::attach_labels(ds, labels_path, cfg.id_col);
  }
  return ds;
}

std::string out_path(const tsrep::RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

void emit_json(const tsrep::RunConfig& cfg, const std::string& name, const json& j) {
  const auto path = out_path(cfg, name);
  tsrep::write_atomic(path, j.dump(2) + "\n");
  std::cout << "wrote " << path << "\n";
}

int cmd_extract(const CommonArgs& args, const std::string& input) {
  const auto ds = load_dataset(args.cfg, input, "");
  const auto catalog =
      args.cfg.validation_catalog_only ? tsrep::validation_catalog() : tsrep::full_catalog();
  const auto m = tsrep::extract_matrix(ds, catalog, args.cfg.levels, args.cfg.threads);
  const auto path = out_path(args.cfg, "features.csv");
  tsrep::write_feature_csv(m, path + ".tmp");
  fs::rename(path + ".tmp", path);
  std::cout << "wrote " << path << " (" << m.rows() << " series x " << m.cols()
            << " features)\n";
  return 0;
}

int cmd_classify(const CommonArgs& args, const std::string& input) {
  const auto ds = load_dataset(args.cfg, input, "");
  json per_series;
  for (const auto& s : ds.series) {
    const auto st = tsrep::demand_stats(s);
    per_series[s.id] = {{"adi", st.adi},
                        {"cv2", st.cv2},
                        {"class", tsrep::demand_class_name(tsrep::classify(st))}};
  }
  json prof;
  for (const auto& [cls, pct] : tsrep::profile(ds)) prof[tsrep::demand_class_name(cls)] = pct;
  emit_json(args.cfg, "demand_profile.json",
            json{{"profile", prof}, {"series", per_series}});
  return 0;
}

int cmd_targets(const CommonArgs& args, const std::string& input) {
  const auto ds = load_dataset(args.cfg, input, "");
  const auto bank =
      tsrep::make_targets(ds, args.cfg.holdout, args.cfg.target_kind, args.cfg.threads);
  const auto path = out_path(args.cfg, "targets.csv");
  tsrep::write_target_csv(bank, path + ".tmp");
  fs::rename(path + ".tmp", path);
  std::cout << "wrote " << path << " (" << bank.series_ids.size() << " series, "
            << bank.excluded_ids.size() << " excluded)\n";
  return 0;
}

int cmd_select(const CommonArgs& args, const std::string& features_path,
               const std::string& sales_path, const std::string& labels_path,
               const std::string& targets_path) {
  require_file(features_path, "run `tsrep extract` first");
  require_file(targets_path, "run `tsrep targets` first");
  const auto ds = load_dataset(args.cfg, sales_path, labels_path);
  const auto m = tsrep::load_feature_csv(features_path);
  const auto bank = tsrep::load_target_csv(targets_path);
  tsrep::CascadeOptions opts;
  opts.alpha = args.cfg.alpha;
  opts.relieff.k_neighbors = args.cfg.k_neighbors;
  opts.cluster_threshold = args.cfg.cluster_threshold;
  opts.cluster_on = args.cfg.cluster_on;
  opts.threads = args.cfg.threads;
  const auto result = tsrep::run_cascade(m, ds, bank, opts);
  json j;
  json selected = json::array();
  for (const auto& f : result.selected) selected.push_back(f.column_name());
  j["selected"] = selected;
  {
    json audit;
    audit["input_features"] = result.audit.input_features;
    audit["dropped_missing"] = result.audit.dropped_missing;
    audit["dropped_constant"] = result.audit.dropped_constant;
    audit["after_prefilter"] = result.audit.after_prefilter;
    audit["dropped_stage1"] = result.audit.dropped_stage1;
    audit["after_stage1"] = result.audit.after_stage1;
    audit["dropped_stage3"] = result.audit.dropped_stage3;
    audit["selected"] = result.audit.selected;
    json pvals = json::array();
    for (const auto& rec : result.audit.pvalues)
      pvals.push_back({{"feature", rec.feature.column_name()},
                       {"task_pvalues", rec.task_pvalues},
                       {"combined_p", rec.combined_p}});
    audit["pvalues"] = pvals;
    json quals = json::array();
    for (const auto& qv : result.audit.qualities)
      quals.push_back({{"feature", qv.feature.column_name()},
                       {"weights", qv.weights},
                       {"mean_quality", qv.mean_quality}});
    audit["qualities"] = quals;
    json clusters = json::array();
    for (const auto& c : result.audit.clusters) {
      json members = json::array();
      for (const auto& mem : c.members) members.push_back(mem.column_name());
      clusters.push_back({{"representative", c.representative.column_name()},
                          {"members", members}});
    }
    audit["clusters"] = clusters;
    j["audit"] = audit;
  }
  emit_json(args.cfg, "selection.json", j);
  return 0;
}

int cmd_embed(const CommonArgs& args, const std::vector<std::string>& tagged_features,
              const std::string& selection_path) {
  std::vector<std::size_t> keep_cols;
  std::vector<std::string> selected_names;
  if (!selection_path.empty()) {
    require_file(selection_path, "run `tsrep select` first");
    std::ifstream f(selection_path);
    json sel = json::parse(f);
    for (const auto& name : sel.at("selected")) selected_names.push_back(name.get<std::string>());
  }

  tsrep::FeatureMatrix joint;
  std::vector<std::string> tags;
  std::vector<std::string> reference_columns;
  for (const auto& spec : tagged_features) {
    const auto [tag, path] = parse_tagged(spec, "--features");
    require_file(path, "run `tsrep extract` first");
    const auto m = tsrep::load_feature_csv(path);
    std::vector<std::string> columns;
    for (const auto& f : m.feature_ids) columns.push_back(f.column_name());
    if (joint.feature_ids.empty()) {
      reference_columns = columns;
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (selected_names.empty() ||
            std::find(selected_names.begin(), selected_names.end(), columns[c]) !=
                selected_names.end())
          keep_cols.push_back(c);
      }
      if (keep_cols.empty())
        throw tsrep::ParamError("--selection matches no columns of '" + path + "'");
      for (std::size_t c : keep_cols) joint.feature_ids.push_back(m.feature_ids[c]);
      joint.values = tsrep::Matrix(0, keep_cols.size());
    } else if (columns != reference_columns) {
      throw tsrep::SchemaError("feature file '" + path +
                               "' disagrees with the first file's columns");
    }
    const std::size_t base = joint.values.rows;
    tsrep::Matrix grown(base + m.rows(), joint.values.cols);
    std::copy(joint.values.data.begin(), joint.values.data.end(), grown.data.begin());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      joint.series_ids.push_back(m.series_ids[r]);
      tags.push_back(tag);
      for (std::size_t j = 0; j < keep_cols.size(); ++j)
        grown.at(base + r, j) = m.values.at(r, keep_cols[j]);
    }
    joint.values = std::move(grown);
  }
  if (joint.series_ids.empty()) throw tsrep::ParamError("--features: none given");

  joint = tsrep::zscore(tsrep::prefilter(joint));
  tsrep::TsneConfig tcfg = args.cfg.embedding;
  tcfg.seed = tsrep::derive_seed(args.cfg.seed, 5);
  auto e = tsrep::tsne(joint.values, tcfg);
  e.series_ids = joint.series_ids;
  e.dataset_tags = tags;

  const auto path = out_path(args.cfg, "embedding.csv");
  tsrep::write_embedding_csv(e, path + ".tmp");
  fs::rename(path + ".tmp", path);
  std::cout << "wrote " << path << "\n";
  json trace = json::array();
  for (const auto& [iter, kl] : e.kl_trace) trace.push_back({{"iter", iter}, {"kl", kl}});
  emit_json(args.cfg, "embedding.json", json{{"points", e.x.size()}, {"kl_trace", trace}});
  for (const auto& svg : tsrep::render_scatter(e, out_path(args.cfg, "instance_space")))
    std::cout << "wrote " << svg << "\n";
  return 0;
}

int cmd_coverage(const CommonArgs& args, const std::string& embedding_path, bool dump_cells) {
  require_file(embedding_path, "run `tsrep embed` first");
  const auto e = tsrep::load_embedding_csv(embedding_path);
  std::map<std::string, std::vector<tsrep::Point2D>> by_tag;
  std::vector<std::string> tag_order;
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    if (!by_tag.count(e.dataset_tags[i])) tag_order.push_back(e.dataset_tags[i]);
    by_tag[e.dataset_tags[i]].push_back({e.x[i], e.y[i]});
  }
  if (tag_order.size() < 2)
    throw tsrep::ParamError("coverage needs at least two dataset tags in the embedding");
  json pairs = json::array();
  for (std::size_t a = 0; a < tag_order.size(); ++a) {
    for (std::size_t b = a + 1; b < tag_order.size(); ++b) {
      const auto g = tsrep::build_grid(by_tag[tag_order[a]], by_tag[tag_order[b]],
                                       args.cfg.grid_n, tag_order[a], tag_order[b]);
      const auto r = tsrep::coverage_report(g);
      pairs.push_back({{"a", r.tag_a},
                       {"b", r.tag_b},
                       {"miscoverage_ab", r.miscoverage_ab},
                       {"miscoverage_ba", r.miscoverage_ba},
                       {"nor_ab", r.nor_ab},
                       {"nor_ba", r.nor_ba},
                       {"occupied_a", r.occupied_a},
                       {"occupied_b", r.occupied_b}});
      if (dump_cells) {
        const auto cells = out_path(args.cfg, "cells_" + r.tag_a + "_" + r.tag_b + ".csv");
        tsrep::write_cells_csv(g, cells);
        std::cout << "wrote " << cells << "\n";
      }
    }
  }
  emit_json(args.cfg, "coverage.json", json{{"grid_n", args.cfg.grid_n}, {"pairs", pairs}});
  return 0;
}

int cmd_report(const CommonArgs& args) {
  if (args.cfg.datasets.size() < 2)
    throw tsrep::ParamError("report needs at least two --data tag=path datasets");
  tsrep::run_pipeline(args.cfg, true);
  std::cout << "wrote " << (fs::path(args.cfg.out_dir) / "report.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsrep: time-series feature spaces and dataset representativeness"};
  app.require_subcommand(1);

  CommonArgs args;
  // --config is applied before flag parsing so flags override the file
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") args.config_path = argv[i + 1];
  if (!args.config_path.empty()) {
    std::ifstream f(args.config_path);
    if (!f) {
      std::cerr << "error: cannot open config '" << args.config_path << "'\n";
      return 1;
    }
    try {
      args.cfg = tsrep::config_from_json(json::parse(f));
    } catch (const std::exception& e) {
      std::cerr << "error: bad config: " << e.what() << "\n";
      return 1;
    }
  }

  std::string levels_str, config_dummy, cluster_on_str, target_kind_str;
  app.add_option("--config", config_dummy, "JSON config file (flags override it)");
  app.add_option("--id-col", args.cfg.id_col, "id column name");
  app.add_option("--date-col", args.cfg.date_col, "date column name (empty: undated)");
  app.add_option("--value-col", args.cfg.value_col, "value column name");
  app.add_option("--frequency", args.cfg.frequency, "base seasonal frequency");
  app.add_option("--levels", levels_str, "aggregation levels, e.g. d,w,m");
  app.add_option("--alpha", args.cfg.alpha, "Holm-Bonferroni significance level");
  app.add_option("--k-neighbors", args.cfg.k_neighbors, "RReliefF neighbor count");
  app.add_option("--cluster-threshold", args.cfg.cluster_threshold,
                 "correlation-distance dendrogram cut");
  app.add_option("--cluster-on", cluster_on_str, "quality|values clustering input");
  app.add_option("--holdout", args.cfg.holdout, "benchmark holdout periods (0: level default)");
  app.add_option("--target-kind", target_kind_str, "mase|raw_forecast targets");
  app.add_option("--perplexity", args.cfg.embedding.perplexity, "t-SNE perplexity");
  app.add_option("--iterations", args.cfg.embedding.iterations, "t-SNE iterations");
  app.add_option("--grid", args.cfg.grid_n, "coverage grid side length");
  app.add_option("--seed", args.cfg.seed, "run seed (stage seeds derive from it)");
  app.add_option("--threads", args.cfg.threads, "worker cap (0: hardware)");
  app.add_option("--out", args.cfg.out_dir, "output directory");
  app.add_flag("--validation-catalog", args.cfg.validation_catalog_only,
               "restrict to the 8x3 validation features");
  app.add_flag("--joint-grid", args.cfg.joint_grid,
               "one grid over all datasets instead of per pair");

  std::string input, features_path, sales_path, labels_path, targets_path, selection_path,
      embedding_path;
  std::vector<std::string> tagged_features, tagged_data, tagged_labels;
  bool dump_cells = false;

  auto* extract = app.add_subcommand("extract", "compute the feature matrix for one dataset");
  extract->fallthrough();
  extract->add_option("--input", input, "sales CSV")->required();

  auto* classify = app.add_subcommand("classify", "demand classes and dataset profile");
  classify->fallthrough();
  classify->add_option("--input", input, "sales CSV")->required();

  auto* targets = app.add_subcommand("targets", "benchmark forecast targets");
  targets->fallthrough();
  targets->add_option("--input", input, "sales CSV")->required();

  auto* select = app.add_subcommand("select", "three-stage feature selection cascade");
  select->fallthrough();
  select->add_option("--features", features_path, "features.csv from extract")->required();
  select->add_option("--input", sales_path, "sales CSV (for labels/tasks)")->required();
  select->add_option("--labels", labels_path, "label CSV")->required();
  select->add_option("--targets", targets_path, "targets.csv from targets")->required();

  auto* embed = app.add_subcommand("embed", "joint 2-D embedding of feature matrices");
  embed->fallthrough();
  embed->add_option("--features", tagged_features, "tag=features.csv (repeatable)")->required();
  embed->add_option("--selection", selection_path, "selection.json restricting the columns");

  auto* coverage = app.add_subcommand("coverage", "grid coverage metrics of an embedding");
  coverage->fallthrough();
  coverage->add_option("--embedding", embedding_path, "embedding.csv")->required();
  coverage->add_flag("--cells", dump_cells, "dump per-cell occupancy CSVs");

  auto* report = app.add_subcommand("report", "full pipeline over two or more datasets");
  report->fallthrough();
  report->add_option("--data", tagged_data, "tag=sales.csv (repeatable)");
  report->add_option("--labels-for", tagged_labels, "tag=labels.csv (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!levels_str.empty()) args.cfg.levels = parse_levels(levels_str);
    if (!cluster_on_str.empty())
      args.cfg.cluster_on = cluster_on_str == "values" ? tsrep::ClusterInput::values
                                                       : tsrep::ClusterInput::quality;
    if (!target_kind_str.empty())
      args.cfg.target_kind = target_kind_str == "raw_forecast" ? tsrep::TargetKind::raw_forecast
                                                               : tsrep::TargetKind::mase;
    for (const auto& spec : tagged_data) {
      const auto [tag, path] = parse_tagged(spec, "--data");
      tsrep::DatasetSpec d;
      d.tag = tag;
      d.path = path;
      args.cfg.datasets.push_back(d);
    }
    for (const auto& spec : tagged_labels) {
      const auto [tag, path] = parse_tagged(spec, "--labels-for");
      bool found = false;
      for (auto& d : args.cfg.datasets)
        if (d.tag == tag) {
          d.labels_path = path;
          found = true;
        }
      if (!found) throw tsrep::ParamError("--labels-for: unknown tag '" + tag + "'");
    }

    if (extract->parsed()) return cmd_extract(args, input);
    if (classify->parsed()) return cmd_classify(args, input);
    if (targets->parsed()) return cmd_targets(args, input);
    if (select->parsed())
      return cmd_select(args, features_path, sales_path, labels_path, targets_path);
    if (embed->parsed()) return cmd_embed(args, tagged_features, selection_path);
    if (coverage->parsed()) return cmd_coverage(args, embedding_path, dump_cells);
    if (report->parsed()) return cmd_report(args);
  } catch (const tsrep::PipelineError& e) {
    std::cerr << "error (pipeline): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
