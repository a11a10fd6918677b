#pragma once

#include <vector>

#include "tsrep/common.hpp"

namespace tsrep {

// Survival function of the chi-squared distribution, P(X > x) at df degrees.
double chi2_survival(double x, double df);

// Mid-ranks (ties get the average rank, 1-based).
std::vector<double> mid_ranks(const std::vector<double>& x);

double mean_of(const std::vector<double>& x);
double population_variance(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);

// Pearson correlation; NaN when either side is constant.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace tsrep
