#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "tsrep/demand.hpp"

using namespace tsrep;

namespace {

SalesSeries repeat_pattern(const std::string& id, const std::vector<double>& pattern,
                           std::size_t length) {
  SalesSeries s;
  s.id = id;
  s.frequency = 7;
  for (std::size_t t = 0; t < length; ++t) s.values.push_back(pattern[t % pattern.size()]);
  return s;
}

}  // namespace

TEST_CASE("quadrant classification") {
  CHECK(classify({1.0, 0.1}) == DemandClass::smooth);
  CHECK(classify({2.0, 0.1}) == DemandClass::intermittent);
  CHECK(classify({1.0, 1.0}) == DemandClass::erratic);
  CHECK(classify({2.0, 1.0}) == DemandClass::lumpy);
}

TEST_CASE("boundary values go to the higher class") {
  CHECK(classify({1.32, 0.1}) == DemandClass::intermittent);
  CHECK(classify({1.0, 0.49}) == DemandClass::erratic);
  CHECK(classify({1.32, 0.49}) == DemandClass::lumpy);
}

TEST_CASE("missing cv2 is unclassifiable") {
  CHECK_THROWS_AS(classify({1.5, kNaN}), UnclassifiableError);
  SalesSeries s;
  s.id = "one_demand";
  s.values = {0, 0, 5, 0};
  CHECK_THROWS_AS(classify(demand_stats(s)), UnclassifiableError);
}

TEST_CASE("classification is scale invariant") {
  testutil::Rng rng(5);
  testutil::DemandRegime regime;
  regime.p_demand = 0.4;
  regime.size_cv2 = 0.8;
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = testutil::make_demand_series("s", 200, regime, rng);
    SalesSeries scaled = s;
    for (double& v : scaled.values) v *= 12.5;
    CHECK(classify(demand_stats(s)) == classify(demand_stats(scaled)));
  }
}

TEST_CASE("profile percentages") {
  // one deterministic pattern per quadrant
  const std::vector<double> smooth = {4, 5, 4, 5, 4, 5, 4};
  const std::vector<double> erratic = {1, 1, 1, 10};
  const std::vector<double> intermittent = {0, 4, 0, 5};
  const std::vector<double> lumpy = {0, 1, 0, 10};

  SUBCASE("one series per class gives 25% each") {
    LabeledDataset ds;
    ds.series.push_back(repeat_pattern("s", smooth, 56));
    ds.series.push_back(repeat_pattern("e", erratic, 56));
    ds.series.push_back(repeat_pattern("i", intermittent, 56));
    ds.series.push_back(repeat_pattern("l", lumpy, 56));
    const auto p = profile(ds);
    CHECK(p.at(DemandClass::smooth) == 25.0);
    CHECK(p.at(DemandClass::erratic) == 25.0);
    CHECK(p.at(DemandClass::intermittent) == 25.0);
    CHECK(p.at(DemandClass::lumpy) == 25.0);
  }

  SUBCASE("all-smooth set") {
    LabeledDataset ds;
    for (int i = 0; i < 5; ++i)
      ds.series.push_back(repeat_pattern("s" + std::to_string(i), smooth, 30 + i));
    const auto p = profile(ds);
    CHECK(p.at(DemandClass::smooth) == 100.0);
    CHECK(p.at(DemandClass::lumpy) == 0.0);
  }

  SUBCASE("planted 40/30/20/10 split of 1000 series is recovered exactly") {
    LabeledDataset ds;
    int idx = 0;
    auto add = [&](const std::vector<double>& pattern, int count) {
      for (int i = 0; i < count; ++i)
        ds.series.push_back(repeat_pattern("p" + std::to_string(idx++), pattern, 84));
    };
    add(smooth, 400);
    add(erratic, 300);
    add(intermittent, 200);
    add(lumpy, 100);
    const auto p = profile(ds);
    CHECK(p.at(DemandClass::smooth) == 40.0);
    CHECK(p.at(DemandClass::erratic) == 30.0);
    CHECK(p.at(DemandClass::intermittent) == 20.0);
    CHECK(p.at(DemandClass::lumpy) == 10.0);
  }

  SUBCASE("percentages sum to 100") {
    testutil::Rng rng(8);
    LabeledDataset ds;
    testutil::DemandRegime regime;
    regime.p_demand = 0.5;
    regime.size_cv2 = 0.5;
    for (int i = 0; i < 37; ++i)
      ds.series.push_back(testutil::make_demand_series("r" + std::to_string(i), 120, regime, rng));
    const auto p = profile(ds);
    double total = 0.0;
    for (const auto& [cls, pct] : p) total += pct;
    CHECK(std::fabs(total - 100.0) < 1e-9);
  }
}

TEST_CASE("pattern stats land in the intended quadrants") {
  const auto st_smooth = demand_stats(repeat_pattern("s", {4, 5, 4, 5, 4, 5, 4}, 56));
  CHECK(st_smooth.adi == 1.0);
  CHECK(st_smooth.cv2 < 0.49);
  const auto st_lumpy = demand_stats(repeat_pattern("l", {0, 1, 0, 10}, 56));
  CHECK(st_lumpy.adi == 2.0);
  CHECK(st_lumpy.cv2 >= 0.49);
}
