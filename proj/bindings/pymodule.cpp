#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tsrep/coverage.hpp"
#include "tsrep/demand.hpp"
#include "tsrep/embedding.hpp"
#include "tsrep/features.hpp"
#include "tsrep/report.hpp"
#include "tsrep/selection.hpp"

namespace py = pybind11;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw tsrep::ParamError("expected a 1-D array");
  return std::vector<double>(a.data(), a.data() + a.shape(0));
}

tsrep::Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw tsrep::ParamError("expected a 2-D array");
  tsrep::Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data.begin());
  return m;
}

py::array_t<double> from_matrix(const tsrep::Matrix& m) {
  py::array_t<double> out({m.rows, m.cols});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

std::vector<tsrep::Point2D> to_points(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw tsrep::ParamError("expected an (n, 2) array");
  std::vector<tsrep::Point2D> pts(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts[i] = {a.at(i, 0), a.at(i, 1)};
  return pts;
}

}  // namespace

PYBIND11_MODULE(tsrep, m) {
  m.doc() = "Time-series feature spaces and dataset representativeness metrics";
  m.attr("__version__") = tsrep::kToolVersion;

  m.def(
      "catalog",
      []() {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& f : tsrep::full_catalog())
          out.emplace_back(f.name, tsrep::level_name(f.level));
        return out;
      },
      "The implemented feature catalog as (name, level) pairs.");

  m.def(
      "compute_features",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
         int frequency, const std::vector<std::string>& levels) {
        tsrep::SalesSeries s;
        s.id = "series";
        s.values = to_vector(values);
        s.frequency = frequency;
        tsrep::validate_series(s);
        tsrep::LabeledDataset ds;
        ds.series.push_back(std::move(s));
        std::vector<tsrep::Level> lv;
        for (const auto& name : levels) lv.push_back(tsrep::level_from_name(name));
        const auto fm = tsrep::extract_matrix(ds, tsrep::full_catalog(), lv, 1);
        std::map<std::string, double> out;
        for (std::size_t c = 0; c < fm.cols(); ++c)
          out[fm.feature_ids[c].column_name()] = fm.values.at(0, c);
        return out;
      },
      py::arg("values"), py::arg("frequency") = 7,
      py::arg("levels") = std::vector<std::string>{"daily", "weekly", "monthly"},
      "Catalog feature values for one daily series, keyed by name@level (NaN = missing).");

  m.def(
      "aggregate",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
         const std::string& to) {
        tsrep::SalesSeries s;
        s.id = "series";
        s.values = to_vector(values);
        return tsrep::aggregate(s, tsrep::level_from_name(to)).values;
      },
      py::arg("values"), py::arg("to"),
      "Temporal aggregation of an undated daily series to weekly or monthly buckets.");

  m.def(
      "demand_stats",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
        tsrep::SalesSeries s;
        s.values = to_vector(values);
        const auto st = tsrep::demand_stats(s);
        return std::make_pair(st.adi, st.cv2);
      },
      py::arg("values"), "(adi, cv2) of a demand series; NaN when undefined.");

  m.def(
      "classify_demand",
      [](double adi, double cv2, double adi_cut, double cv2_cut) {
        return tsrep::demand_class_name(tsrep::classify({adi, cv2}, adi_cut, cv2_cut));
      },
      py::arg("adi"), py::arg("cv2"), py::arg("adi_cut") = 1.32, py::arg("cv2_cut") = 0.49);

  m.def(
      "kruskal_wallis",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
         const std::vector<std::string>& labels) {
        return tsrep::kruskal_wallis(to_vector(values), labels);
      },
      py::arg("values"), py::arg("labels"));

  m.def("fisher_combine", &tsrep::fisher_combine, py::arg("pvalues"));

  m.def("holm_bonferroni", &tsrep::holm_bonferroni, py::arg("pvalues"), py::arg("alpha") = 0.05);

  m.def(
      "rrelieff",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& features,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& target,
         int k_neighbors) {
        tsrep::RreliefOptions opts;
        opts.k_neighbors = k_neighbors;
        return tsrep::rrelieff(to_matrix(features), to_vector(target), opts);
      },
      py::arg("features"), py::arg("target"), py::arg("k_neighbors") = 10,
      "RReliefF feature weights for a regression target.");

  m.def(
      "forecast_targets",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
         int frequency, int holdout) {
        tsrep::SalesSeries s;
        s.id = "series";
        s.values = to_vector(values);
        s.frequency = frequency;
        tsrep::LabeledDataset ds;
        ds.series.push_back(std::move(s));
        const auto bank = tsrep::make_targets(ds, holdout);
        std::map<std::string, double> out;
        if (bank.series_ids.empty())
          throw tsrep::ParamError("series excluded: too short or zero scaling denominator");
        for (std::size_t c = 0; c < bank.values.cols; ++c)
          out[bank.method_names[c]] = bank.values.at(0, c);
        return out;
      },
      py::arg("values"), py::arg("frequency") = 7, py::arg("holdout") = 0,
      "Scaled holdout errors of the seven benchmark forecasters for one series.");

  m.def(
      "pca",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         std::size_t ncomp) {
        const auto r = tsrep::pca(to_matrix(x), ncomp);
        return std::make_pair(from_matrix(r.scores), r.explained_ratio);
      },
      py::arg("x"), py::arg("ncomp") = 2, "(scores, explained_variance_ratios).");

  m.def(
      "tsne",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         double perplexity, int iterations, std::uint64_t seed) {
        tsrep::TsneConfig cfg;
        cfg.perplexity = perplexity;
        cfg.iterations = iterations;
        cfg.seed = seed;
        const auto e = tsrep::tsne(to_matrix(x), cfg);
        tsrep::Matrix pts(e.x.size(), 2);
        for (std::size_t i = 0; i < e.x.size(); ++i) {
          pts.at(i, 0) = e.x[i];
          pts.at(i, 1) = e.y[i];
        }
        return std::make_pair(from_matrix(pts), e.kl_trace);
      },
      py::arg("x"), py::arg("perplexity") = 30.0, py::arg("iterations") = 1000,
      py::arg("seed") = 0,
      "Exact t-SNE with PCA initialization; returns (embedding, kl_trace).");

  m.def(
      "coverage_metrics",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points_a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& points_b,
         int n_side) {
        const auto g = tsrep::build_grid(to_points(points_a), to_points(points_b), n_side);
        const auto r = tsrep::coverage_report(g);
        std::map<std::string, double> out;
        out["miscoverage_ab"] = r.miscoverage_ab;
        out["miscoverage_ba"] = r.miscoverage_ba;
        out["nor_ab"] = r.nor_ab;
        out["nor_ba"] = r.nor_ba;
        out["occupied_a"] = static_cast<double>(r.occupied_a);
        out["occupied_b"] = static_cast<double>(r.occupied_b);
        return out;
      },
      py::arg("points_a"), py::arg("points_b"), py::arg("n_side") = 30,
      "Grid miscoverage and non-overlapping ratios between two 2-D point sets.");
}
