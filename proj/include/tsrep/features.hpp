#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "tsrep/common.hpp"
#include "tsrep/series.hpp"

namespace tsrep {

// Conventions, stated once and tested:
//   - DFT angles in radians, in (-pi, pi].
//   - Quantiles are type 7 (linear interpolation on sorted order statistics).
//   - sigma-based features use the population standard deviation.
//   - A feature whose preconditions fail for a series yields NaN (missing),
//     never an exception.
enum class FeatureKind {
  count_below,
  fft_real,
  fft_imag,
  fft_abs,
  fft_angle,
  trough,
  has_duplicate_max,
  variance_larger_than_standard_deviation,
  number_crossing,
  change_quantiles,
  ratio_beyond_r_sigma,
  large_standard_deviation,
  agg_linear_trend,
  cwt_coefficient,
  approximate_entropy,
  fourier_entropy,
  augmented_dickey_fuller_stat,
  e_acf1,
  spectral_entropy,
  trend_strength,
  seasonality_strength,
  seasonal_period,
  acf1,
  boxcox_lambda,
  adi,
  cv2,
};

struct FeatureId {
  std::string name;  // canonical, derived from kind + params
  Level level = Level::daily;
  FeatureKind kind = FeatureKind::acf1;
  std::map<std::string, double> params;

  std::string column_name() const { return name + "@" + level_name(level); }
};

bool operator==(const FeatureId& a, const FeatureId& b);

// The implemented catalog: the 42 selected features at their stated levels
// plus the 8 validation features (spectral_entropy, trend_strength,
// seasonality_strength, seasonal_period, acf1, boxcox_lambda, adi, cv2) at
// daily, weekly, and monthly levels. 66 entries in total.
std::vector<FeatureId> full_catalog();
std::vector<FeatureId> validation_catalog();  // the 8 x 3 validation subset

// Rows = series, columns = catalog entries, NaN = missing.
struct FeatureMatrix {
  std::vector<std::string> series_ids;
  std::vector<FeatureId> feature_ids;
  Matrix values;

  std::size_t rows() const { return values.rows; }
  std::size_t cols() const { return values.cols; }
};

// DFT coefficient c_k = sum_n x_n * exp(-2*pi*i*k*n/N).
struct DftCoefficient {
  double real;
  double imag;
  double abs;
  double angle;  // radians, in (-pi, pi]
};
DftCoefficient dft_coefficient(const std::vector<double>& x, std::size_t k);

// Classical moving-average decomposition with period-mean seasonality.
// trend: centered MA of window = frequency (even windows use the 2xm form);
// seasonal: per-period means of (x - trend), re-centered to mean 0;
// remainder: x - trend - seasonal. Components are full length; only
// [valid_lo, valid_hi) has a defined trend/remainder.
struct Decomposition {
  std::vector<double> trend;
  std::vector<double> seasonal;
  std::vector<double> remainder;
  std::vector<double> seasonal_means;  // length = frequency
  std::size_t valid_lo = 0;
  std::size_t valid_hi = 0;
  double trend_strength = kNaN;
  double seasonality_strength = kNaN;
};
// Requires length >= 2*frequency; throws TooShortError otherwise.
Decomposition decompose(const SalesSeries& s);

// Per-(series, level) computation context; caches the spectrum, sorted
// values and decomposition across catalog entries.
class FeatureContext {
 public:
  FeatureContext(std::vector<double> values, int frequency);

  const std::vector<double>& values() const { return x_; }
  int frequency() const { return frequency_; }

  double mean();
  double pop_var();
  double pop_std();
  const std::vector<double>& sorted();
  const std::vector<std::complex<double>>& dft();
  const Decomposition* decomposition();  // nullptr when too short

 private:
  std::vector<double> x_;
  int frequency_;
  bool have_moments_ = false;
  double mean_ = 0.0, var_ = 0.0;
  std::vector<double> sorted_;
  std::vector<std::complex<double>> dft_;
  bool have_dft_ = false;
  bool tried_decomp_ = false;
  Decomposition decomp_;
  bool have_decomp_ = false;
};

// Scalar feature value, NaN when the feature's preconditions fail.
double compute_feature(FeatureContext& ctx, const FeatureId& f);
double compute_feature(const SalesSeries& s, const FeatureId& f);

// One row per series (dataset order), columns in catalog order; cells for
// levels outside `levels` or with failed preconditions are NaN. Per-series
// work is independent; results do not depend on scheduling.
FeatureMatrix extract_matrix(const LabeledDataset& ds, const std::vector<FeatureId>& catalog,
                             const std::vector<Level>& levels, int threads = 0);

// Type-7 quantile of unsorted data.
double quantile_type7(std::vector<double> x, double q);
// Lag-1 autocorrelation: sum (x_t - m)(x_{t+1} - m) / sum (x_t - m)^2.
double lag1_autocorrelation(const std::vector<double>& x);

}  // namespace tsrep
