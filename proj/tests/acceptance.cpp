// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "relieff_oracle.hpp"
#include "test_util.hpp"
#include "tsrep/coverage.hpp"
#include "tsrep/csv.hpp"
#include "tsrep/demand.hpp"
#include "tsrep/embedding.hpp"
#include "tsrep/features.hpp"
#include "tsrep/report.hpp"
#include "tsrep/selection.hpp"
#include "tsrep/stats.hpp"

using namespace tsrep;

namespace {

struct Checker {
  std::ostringstream detail;
  bool ok = true;
  bool verbose = std::getenv("TSREP_ACCEPT_VERBOSE") != nullptr;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "    failed: " << what << "\n";
    } else if (verbose) {
      detail << "    ok: " << what << "\n";
    }
  }
  void expect_near(double got, double want, double tol, const std::string& what) {
    if (!(std::fabs(got - want) <= tol)) {
      ok = false;
      detail << "    failed: " << what << " (got " << got << ", want " << want << " +- " << tol
             << ")\n";
    }
  }
};

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<void(Checker&)>& body) {
  Checker c;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << "    exception: " << e.what() << "\n";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(1);
  line << (c.ok ? "PASS" : "FAIL") << " criterion " << number << " [" << name << "] (" << secs
       << "s)";
  std::cout << line.str() << "\n";
  if (!c.ok || c.verbose) std::cout << c.detail.str();
  if (!c.ok) ++g_failures;
}

// chi-squared survival at integer half-df via the exact Poisson series
double chi2_sf_integer_shape(double x, int df) {
  const double half = x / 2.0;
  double term = 1.0, series = 1.0;
  for (int k = 1; k < df / 2; ++k) {
    term *= half / k;
    series += term;
  }
  return std::exp(-half) * series;
}

// ---------------------------------------------------------------------------

void criterion1_formula_oracles(Checker& c) {
  {
    const std::vector<double> ps = {0.1, 0.2, 0.3, 0.4};
    double x = 0.0;
    for (double p : ps) x += -2.0 * std::log(p);
    c.expect_near(x, 12.0646, 5e-5, "Fisher statistic");
    c.expect_near(fisher_combine(ps), chi2_sf_integer_shape(x, 8), 1e-6,
                  "Fisher combined p against the chi-squared(8) oracle");
    c.expect_near(fisher_combine({1, 1, 1, 1}), 1.0, 1e-12, "Fisher of all-ones");
    const double x4 = -2.0 * 4.0 * std::log(0.05);
    c.expect_near(fisher_combine({0.05, 0.05, 0.05, 0.05}), chi2_sf_integer_shape(x4, 8), 1e-6,
                  "Fisher of four 0.05");
  }
  {
    const double p = kruskal_wallis({1, 2, 3, 4}, {"A", "A", "B", "B"});
    c.expect_near(p, std::erfc(std::sqrt(1.2)), 1e-6, "Kruskal-Wallis hand case (H = 2.4)");
  }
  {
    const auto keep = holm_bonferroni({0.01, 0.04, 0.03, 0.005}, 0.05);
    c.expect(keep == std::vector<bool>{true, false, false, true}, "Holm keep set");
  }
  {
    const std::vector<Point2D> a = {{0.1, 0.1}, {0.1, 0.9}, {0.0, 0.0}};
    const std::vector<Point2D> b = {{0.9, 0.1}, {0.9, 0.9}, {1.0, 1.0}};
    const auto g = build_grid(a, b, 2);
    c.expect(miscoverage(g, "A", "B") == 0.5, "2x2 miscoverage hand case");
    const std::vector<Point2D> a2 = {{0.1, 0.1}, {0.15, 0.2}, {0.2, 0.1}, {0.9, 0.1}};
    const std::vector<Point2D> b2 = {{0.85, 0.2}, {0.0, 0.9}, {1.0, 1.0}};
    c.expect(nor(build_grid(a2, b2, 2), "A", "B") == 0.75, "2x2 NOR hand case");
    std::vector<Point2D> same = {{0, 0}, {0.3, 0.7}, {1, 1}};
    c.expect(miscoverage(build_grid(same, same, 2), "A", "B") == 0.0,
             "identical sets miscoverage");
  }
  {
    const auto c1 = dft_coefficient({1, 0, 0, 0}, 1);
    c.expect(std::fabs(c1.real - 1.0) < 1e-12 && std::fabs(c1.imag) < 1e-12 &&
                 std::fabs(c1.angle) < 1e-12,
             "DFT impulse");
    const auto c2 = dft_coefficient({0, 1, 0, -1}, 1);
    c.expect(std::fabs(c2.real) < 1e-12 && std::fabs(c2.imag + 2.0) < 1e-12 &&
                 std::fabs(c2.abs - 2.0) < 1e-12 && std::fabs(c2.angle + M_PI / 2) < 1e-12,
             "DFT 4-point hand case");
    const auto c3 = dft_coefficient(std::vector<double>(6, 2.5), 0);
    c.expect(std::fabs(c3.real - 15.0) < 1e-12, "DFT DC term");
  }
}

void criterion2_relieff_bruteforce(Checker& c) {
  RreliefOptions opts;
  opts.k_neighbors = 2;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    testutil::Rng rng(seed * 7919);
    Matrix m(12, 3);
    std::vector<double> target;
    for (std::size_t r = 0; r < 12; ++r) {
      for (std::size_t col = 0; col < 3; ++col) m.at(r, col) = rng.uniform();
      target.push_back(rng.uniform());
    }
    const auto fast = rrelieff(m, target, opts);
    const auto slow = oracle::rrelieff_bruteforce(m, target, 2);
    for (std::size_t col = 0; col < 3; ++col)
      worst = std::max(worst, std::fabs(fast[col] - slow[col]));
  }
  c.expect(worst < 1e-12, "streaming vs brute-force weights (worst |diff| = " +
                              std::to_string(worst) + ")");
}

void criterion3_null_calibration(Checker& c) {
  {
    testutil::Rng rng(424242);
    std::vector<double> pvals;
    for (int rep = 0; rep < 500; ++rep) {
      std::vector<double> values;
      std::vector<std::string> labels;
      for (int i = 0; i < 100; ++i) {
        values.push_back(rng.normal());
        labels.push_back("a");
      }
      for (int i = 0; i < 100; ++i) {
        values.push_back(rng.normal());
        labels.push_back("b");
      }
      pvals.push_back(kruskal_wallis(values, labels));
    }
    std::sort(pvals.begin(), pvals.end());
    double d = 0.0;
    const double n = static_cast<double>(pvals.size());
    for (std::size_t i = 0; i < pvals.size(); ++i) {
      d = std::max(d, std::fabs((i + 1.0) / n - pvals[i]));
      d = std::max(d, std::fabs(pvals[i] - i / n));
    }
    const double crit = 1.62762 / std::sqrt(n);  // alpha = 0.01
    c.expect(d <= crit, "KW null p-values uniform (KS D = " + std::to_string(d) +
                            ", critical " + std::to_string(crit) + ")");
  }
  {
    int wins = 0;
    for (int run = 0; run < 100; ++run) {
      testutil::Rng rng(5000 + run);
      Matrix m(200, 2);
      std::vector<double> target;
      for (std::size_t r = 0; r < 200; ++r) {
        const double t = rng.uniform();
        m.at(r, 0) = t;
        m.at(r, 1) = rng.normal();
        target.push_back(t);
      }
      const auto w = rrelieff(m, target);
      if (w[0] > w[1]) ++wins;
    }
    c.expect(wins >= 95, "RReliefF ranks informative above noise in " + std::to_string(wins) +
                             "/100 runs (need >= 95)");
  }
}

void criterion4_embedding(Checker& c) {
  std::vector<int> labels;
  const auto m300 = testutil::gaussian_clusters(100, 3, 10, 12.0, 3141, &labels);
  {
    const auto p = tsne_joint_probabilities(m300, 30.0);
    double sum = 0.0, comp = 0.0;
    for (double v : p) {
      const double y = v - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    c.expect(std::fabs(sum - 1.0) < 1e-12,
             "symmetrized P sums to 1 (|sum-1| = " + std::to_string(std::fabs(sum - 1.0)) + ")");
  }
  {
    TsneConfig cfg;
    const auto e = tsne(m300, cfg);
    std::vector<double> cx(3, 0), cy(3, 0), cnt(3, 0);
    for (std::size_t i = 0; i < e.x.size(); ++i) {
      cx[labels[i]] += e.x[i];
      cy[labels[i]] += e.y[i];
      cnt[labels[i]] += 1;
    }
    for (int k = 0; k < 3; ++k) {
      cx[k] /= cnt[k];
      cy[k] /= cnt[k];
    }
    int pure = 0;
    for (std::size_t i = 0; i < e.x.size(); ++i) {
      int best = 0;
      double bd = 1e300;
      for (int k = 0; k < 3; ++k) {
        const double d = (e.x[i] - cx[k]) * (e.x[i] - cx[k]) + (e.y[i] - cy[k]) * (e.y[i] - cy[k]);
        if (d < bd) {
          bd = d;
          best = k;
        }
      }
      if (best == labels[i]) ++pure;
    }
    const double purity = static_cast<double>(pure) / static_cast<double>(e.x.size());
    c.expect(purity >= 0.9, "3-cluster purity " + std::to_string(purity) + " (need >= 0.9)");

    const auto e2 = tsne(m300, cfg);
    c.expect(std::memcmp(e.x.data(), e2.x.data(), e.x.size() * sizeof(double)) == 0 &&
                 std::memcmp(e.y.data(), e2.y.data(), e.y.size() * sizeof(double)) == 0,
             "bit-identical rerun");
  }
  {
    int descents = 0;
    for (int seed = 0; seed < 20; ++seed) {
      const auto m = testutil::gaussian_clusters(40, 3, 10, 10.0, 9000 + seed);
      TsneConfig cfg;
      cfg.perplexity = 20.0;
      const auto e = tsne(m, cfg);
      if (e.kl_trace.back().second < e.kl_trace.front().second) ++descents;
    }
    c.expect(descents == 20, "final KL < initial KL on " + std::to_string(descents) +
                                 "/20 seeds (need 20)");
  }
}

RunConfig pipeline_config() {
  RunConfig cfg;
  cfg.levels = {Level::daily, Level::weekly, Level::monthly};
  cfg.embedding.perplexity = 30.0;
  cfg.embedding.iterations = 1000;
  cfg.grid_n = 7;  // generator-calibrated desk-scale grid (1000 points)
  cfg.seed = 99;
  return cfg;
}

void criterion5_end_to_end(Checker& c) {
  using testutil::LabeledRegime;
  const std::size_t length = 1092;
  const std::size_t per_regime = 125;

  const std::vector<LabeledRegime> mixture = {
      {"steady", {0.90, 20.0, 0.20, 0.25, 0.0}},
      {"midvol", {0.60, 8.0, 0.50, 0.10, 0.0005}},
      {"sparse", {0.35, 5.0, 0.90, 0.0, 0.0}},
      {"heavy", {0.80, 50.0, 0.10, 0.40, -0.0003}},
  };
  const std::vector<LabeledRegime> smooth_family = {
      {"s1", {0.95, 30.0, 0.05, 0.30, 0.0}},
      {"s2", {0.92, 12.0, 0.10, 0.10, 0.0004}},
      {"s3", {0.97, 60.0, 0.08, 0.20, 0.0}},
      {"s4", {0.90, 22.0, 0.15, 0.0, -0.0002}},
  };
  const std::vector<LabeledRegime> lumpy_family = {
      {"l1", {0.38, 9.0, 0.90, 0.15, 0.0}},
      {"l2", {0.30, 40.0, 1.40, 0.0, 0.0006}},
      {"l3", {0.15, 4.0, 0.70, 0.0, 0.0}},
      {"l4", {0.22, 16.0, 1.80, 0.0, -0.0004}},
  };

  {
    const auto a = testutil::make_demand_dataset("a", per_regime, length, mixture, 1000);
    const auto b = testutil::make_demand_dataset("b", per_regime, length, mixture, 2000);
    const auto result =
        run_pipeline(pipeline_config(), {{"draw1", a}, {"draw2", b}}, /*emit_files=*/false);
    const auto& pair = result.report.at("coverage").at(0);
    for (const char* key : {"miscoverage_ab", "miscoverage_ba", "nor_ab", "nor_ba"}) {
      const double v = pair.at(key).get<double>();
      c.expect(v < 0.07, std::string("same-generator ") + key + " = " + std::to_string(v) +
                             " (need < 0.07)");
    }
  }
  {
    const auto a = testutil::make_demand_dataset("s", per_regime, length, smooth_family, 3000);
    const auto b = testutil::make_demand_dataset("l", per_regime, length, lumpy_family, 4000);
    const auto result =
        run_pipeline(pipeline_config(), {{"smooth", a}, {"lumpy", b}}, /*emit_files=*/false);
    const auto& pair = result.report.at("coverage").at(0);
    for (const char* key : {"miscoverage_ab", "miscoverage_ba"}) {
      const double v = pair.at(key).get<double>();
      c.expect(v > 0.20, std::string("disjoint-regime ") + key + " = " + std::to_string(v) +
                             " (need > 0.20)");
    }
  }
}

void criterion6_cascade_audit(Checker& c) {
  const std::size_t n = 200;
  testutil::Rng rng(60606);
  LabeledDataset ds;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    SalesSeries s;
    s.id = "s" + std::to_string(i);
    s.values = {1, 2};
    ds.series.push_back(s);
    labels.push_back("c" + std::to_string(i % 4));
  }
  ds.tasks["class"] = labels;

  // latents: z_0..z_9 behind the informative features, y_0..y_4 behind the
  // five duplicated pairs
  std::vector<std::vector<double>> z(10, std::vector<double>(n)), y(5, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : z) v[i] = rng.normal();
    for (auto& v : y) v[i] = rng.normal();
  }

  FeatureMatrix m;
  m.values = Matrix(n, 30);
  auto add_column = [&](std::size_t col, const std::string& name,
                        const std::function<double(std::size_t)>& gen) {
    FeatureId f;
    f.name = name;
    m.feature_ids.push_back(f);
    for (std::size_t i = 0; i < n; ++i) m.values.at(i, col) = gen(i);
  };
  std::size_t col = 0;
  for (int j = 0; j < 10; ++j, ++col) {
    add_column(col, "inf_" + std::to_string(j), [&, j](std::size_t i) {
      return 2.0 * static_cast<double>((i + j) % 4) + z[j][i];
    });
  }
  for (int p = 0; p < 5; ++p) {
    const auto gen = [&, p](std::size_t i) {
      return 2.0 * static_cast<double>((i + 2 * p) % 4) + y[p][i];
    };
    add_column(col++, "pair" + std::to_string(p) + "_a", gen);
    add_column(col++, "pair" + std::to_string(p) + "_b", gen);  // exact duplicate
  }
  for (int j = 0; j < 10; ++j, ++col) {
    add_column(col, "noise_" + std::to_string(j), [&](std::size_t) { return rng.normal(); });
  }
  for (std::size_t i = 0; i < n; ++i) m.series_ids.push_back("s" + std::to_string(i));

  TargetBank bank;
  bank.method_names.assign(forecaster_names().begin(), forecaster_names().end());
  bank.values = Matrix(n, kNumForecasters);
  for (std::size_t i = 0; i < n; ++i) {
    bank.series_ids.push_back("s" + std::to_string(i));
    for (int t = 0; t < 5; ++t) bank.values.at(i, t) = y[t][i];
    bank.values.at(i, 5) = z[0][i];
    bank.values.at(i, 6) = z[1][i];
  }

  CascadeOptions opts;
  opts.alpha = 0.05;
  const auto result = run_cascade(m, ds, bank, opts);
  const auto& audit = result.audit;

  std::size_t noise_surviving_stage1 = 0;
  for (const auto& q : audit.qualities)
    if (q.feature.name.rfind("noise_", 0) == 0) ++noise_surviving_stage1;
  c.expect(noise_surviving_stage1 <= 2,
           "stage 1 eliminates >= 8/10 noise features (survivors: " +
               std::to_string(noise_surviving_stage1) + ")");

  for (int p = 0; p < 5; ++p) {
    int kept = 0;
    for (const auto& f : result.selected) {
      if (f.name == "pair" + std::to_string(p) + "_a" ||
          f.name == "pair" + std::to_string(p) + "_b")
        ++kept;
    }
    c.expect(kept == 1, "duplicated pair " + std::to_string(p) + " keeps exactly one (kept " +
                            std::to_string(kept) + ")");
  }

  c.expect(audit.input_features ==
               audit.dropped_missing + audit.dropped_constant + audit.after_prefilter,
           "prefilter counts reconcile");
  c.expect(audit.after_prefilter == audit.dropped_stage1 + audit.after_stage1,
           "stage 1 counts reconcile");
  c.expect(audit.after_stage1 == audit.dropped_stage3 + audit.selected,
           "stage 3 counts reconcile");
  c.expect(audit.input_features == 30, "audit input count");
}

// Optional large-scale check against the public M5 dataset (wide CSV with
// d_1..d_N columns). Enabled by TSREP_M5_WIDE_CSV; never part of CI.
void criterion7_m5_profile(Checker& c, const char* path) {
  auto rows = read_csv(path);
  if (rows.size() < 2) throw DataError("M5 csv looks empty");
  const auto& header = rows.front();
  std::size_t first_day = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].rfind("d_", 0) == 0) {
      first_day = i;
      break;
    }
  }
  if (first_day == header.size()) throw SchemaError("no d_* columns found");
  LabeledDataset ds;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    SalesSeries s;
    s.id = rows[r][0];
    s.frequency = 7;
    for (std::size_t i = first_day; i < rows[r].size(); ++i)
      s.values.push_back(std::stod(rows[r][i]));
    ds.series.push_back(std::move(s));
  }
  const auto p = profile(ds);
  c.expect_near(p.at(DemandClass::intermittent), 73.35, 2.0, "intermittent share");
  c.expect_near(p.at(DemandClass::lumpy), 17.01, 2.0, "lumpy share");
  c.expect_near(p.at(DemandClass::smooth), 6.76, 2.0, "smooth share");
  c.expect_near(p.at(DemandClass::erratic), 2.88, 2.0, "erratic share");
}

}  // namespace

int main() {
  std::cout << "tsrep acceptance suite\n";
  criterion(1, "formula oracles", criterion1_formula_oracles);
  criterion(2, "RReliefF brute-force equivalence", criterion2_relieff_bruteforce);
  criterion(3, "null calibration", criterion3_null_calibration);
  criterion(4, "embedding properties", criterion4_embedding);
  criterion(5, "end-to-end representativeness", criterion5_end_to_end);
  criterion(6, "selection cascade audit", criterion6_cascade_audit);
  if (const char* m5 = std::getenv("TSREP_M5_WIDE_CSV")) {
    criterion(7, "M5 demand profile (optional)",
              [m5](Checker& c) { criterion7_m5_profile(c, m5); });
  } else {
    std::cout << "SKIP criterion 7 [M5 demand profile] (optional; set TSREP_M5_WIDE_CSV to the "
                 "sales_train csv to enable)\n";
  }
  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
