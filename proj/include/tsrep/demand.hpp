#pragma once

#include <map>
#include <string>

#include "tsrep/series.hpp"

namespace tsrep {

// Intermittency / erraticness statistics of a demand series.
// adi = length / number of nonzero observations; cv2 = sample variance of
// nonzero sizes over squared mean (NaN when fewer than 2 nonzeros).
struct DemandStats {
  double adi = kNaN;
  double cv2 = kNaN;
};

DemandStats demand_stats(const SalesSeries& s);

enum class DemandClass { smooth, erratic, intermittent, lumpy };

std::string demand_class_name(DemandClass c);

// Four-quadrant categorization over (adi, cv2). Boundary values go to the
// higher-adi / higher-cv2 class.
DemandClass classify(const DemandStats& st, double adi_cut = 1.32, double cv2_cut = 0.49);

// Percentage of series per class; percentages sum to 100.
std::map<DemandClass, double> profile(const LabeledDataset& ds, double adi_cut = 1.32,
                                      double cv2_cut = 0.49);

}  // namespace tsrep
