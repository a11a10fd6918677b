#include "tsrep/demand.hpp"

#include <cmath>

#include "tsrep/features.hpp"

namespace tsrep {

DemandStats demand_stats(const SalesSeries& s) {
  FeatureContext ctx(s.values, s.frequency);
  DemandStats st;
  st.adi = compute_feature(ctx, FeatureId{"adi", Level::daily, FeatureKind::adi, {}});
  st.cv2 = compute_feature(ctx, FeatureId{"cv2", Level::daily, FeatureKind::cv2, {}});
  return st;
}

std::string demand_class_name(DemandClass c) {
  switch (c) {
    case DemandClass::smooth: return "smooth";
    case DemandClass::erratic: return "erratic";
    case DemandClass::intermittent: return "intermittent";
    case DemandClass::lumpy: return "lumpy";
  }
  return "smooth";
}

DemandClass classify(const DemandStats& st, double adi_cut, double cv2_cut) {
  if (!std::isfinite(st.adi) || !std::isfinite(st.cv2))
    throw UnclassifiableError("demand stats not finite (fewer than 2 nonzero observations?)");
  if (st.adi < adi_cut) return st.cv2 < cv2_cut ? DemandClass::smooth : DemandClass::erratic;
  return st.cv2 < cv2_cut ? DemandClass::intermittent : DemandClass::lumpy;
}

std::map<DemandClass, double> profile(const LabeledDataset& ds, double adi_cut, double cv2_cut) {
  if (ds.series.empty()) throw ParamError("profile: empty dataset");
  std::map<DemandClass, std::size_t> counts;
  for (const auto& s : ds.series) {
    try {
      counts[classify(demand_stats(s), adi_cut, cv2_cut)] += 1;
    } catch (const UnclassifiableError& e) {
      throw UnclassifiableError("series '" + s.id + "': " + e.what());
    }
  }
  std::map<DemandClass, double> out;
  for (DemandClass c : {DemandClass::smooth, DemandClass::erratic, DemandClass::intermittent,
                        DemandClass::lumpy})
    out[c] = 100.0 * static_cast<double>(counts[c]) / static_cast<double>(ds.series.size());
  return out;
}

}  // namespace tsrep
