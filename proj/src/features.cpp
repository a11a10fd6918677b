#include "tsrep/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numeric>
#include <sstream>

#include "tsrep/stats.hpp"

namespace tsrep {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

bool operator==(const FeatureId& a, const FeatureId& b) {
  return a.name == b.name && a.level == b.level;
}

double quantile_type7(std::vector<double> x, double q) {
  if (x.empty()) return kNaN;
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const std::size_t idx = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(idx);
  if (idx + 1 < x.size()) return x[idx] * (1.0 - frac) + x[idx + 1] * frac;
  return x.back();
}

double lag1_autocorrelation(const std::vector<double>& x) {
  if (x.size() < 2) return kNaN;
  const double m = mean_of(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - m;
    den += d * d;
    if (i + 1 < x.size()) num += d * (x[i + 1] - m);
  }
  if (den <= 0.0) return kNaN;
  return num / den;
}

DftCoefficient dft_coefficient(const std::vector<double>& x, std::size_t k) {
  const std::size_t n = x.size();
  if (k >= n) throw ParamError("dft_coefficient: k out of range");
  double re = 0.0, im = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double ang = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(t) /
                       static_cast<double>(n);
    re += x[t] * std::cos(ang);
    im += x[t] * std::sin(ang);
  }
  double angle = std::atan2(im, re);
  if (angle <= -kPi) angle = kPi;  // convention: angle in (-pi, pi]
  return {re, im, std::hypot(re, im), angle};
}

// ---------------------------------------------------------------------------
// Decomposition

Decomposition decompose(const SalesSeries& s) {
  const std::size_t n = s.values.size();
  const int m = s.frequency;
  if (n < 2 * static_cast<std::size_t>(m))
    throw TooShortError("series '" + s.id + "': need at least 2*frequency observations");
  const auto& x = s.values;

  Decomposition d;
  d.trend.assign(n, kNaN);
  const std::size_t half = static_cast<std::size_t>(m) / 2;
  d.valid_lo = half;
  d.valid_hi = n - half;
  if (m % 2 == 1) {
    for (std::size_t t = half; t < n - half; ++t) {
      double sum = 0.0;
      for (std::size_t j = t - half; j <= t + half; ++j) sum += x[j];
      d.trend[t] = sum / static_cast<double>(m);
    }
  } else {
    // 2 x m moving average: half weights on the two outermost points
    for (std::size_t t = half; t < n - half; ++t) {
      double sum = 0.5 * (x[t - half] + x[t + half]);
      for (std::size_t j = t - half + 1; j < t + half; ++j) sum += x[j];
      d.trend[t] = sum / static_cast<double>(m);
    }
  }

  std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(m), 0);
  for (std::size_t t = d.valid_lo; t < d.valid_hi; ++t) {
    const std::size_t idx = t % static_cast<std::size_t>(m);
    sums[idx] += x[t] - d.trend[t];
    counts[idx] += 1;
  }
  d.seasonal_means.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    d.seasonal_means[i] = counts[i] > 0 ? sums[i] / static_cast<double>(counts[i]) : 0.0;
  const double grand = mean_of(d.seasonal_means);
  for (double& v : d.seasonal_means) v -= grand;

  d.seasonal.resize(n);
  for (std::size_t t = 0; t < n; ++t) d.seasonal[t] = d.seasonal_means[t % m];
  d.remainder.assign(n, kNaN);
  std::vector<double> rem, deseason, detrended;
  for (std::size_t t = d.valid_lo; t < d.valid_hi; ++t) {
    d.remainder[t] = x[t] - d.trend[t] - d.seasonal[t];
    rem.push_back(d.remainder[t]);
    deseason.push_back(x[t] - d.seasonal[t]);
    detrended.push_back(x[t] - d.trend[t]);
  }
  const double var_rem = population_variance(rem);
  const double var_deseason = population_variance(deseason);
  const double var_detrended = population_variance(detrended);
  d.trend_strength = var_deseason > 0.0 ? std::max(0.0, 1.0 - var_rem / var_deseason) : kNaN;
  d.seasonality_strength =
      var_detrended > 0.0 ? std::max(0.0, 1.0 - var_rem / var_detrended) : kNaN;
  return d;
}

// ---------------------------------------------------------------------------
// FeatureContext

FeatureContext::FeatureContext(std::vector<double> values, int frequency)
    : x_(std::move(values)), frequency_(frequency) {}

double FeatureContext::mean() {
  if (!have_moments_) {
    mean_ = mean_of(x_);
    var_ = population_variance(x_);
    have_moments_ = true;
  }
  return mean_;
}

double FeatureContext::pop_var() {
  mean();
  return var_;
}

double FeatureContext::pop_std() { return std::sqrt(pop_var()); }

const std::vector<double>& FeatureContext::sorted() {
  if (sorted_.size() != x_.size()) {
    sorted_ = x_;
    std::sort(sorted_.begin(), sorted_.end());
  }
  return sorted_;
}

const std::vector<std::complex<double>>& FeatureContext::dft() {
  if (!have_dft_) {
    const std::size_t n = x_.size();
    dft_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // rotation recurrence; drift O(n*eps) is far below test tolerances
      const double step = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
      const std::complex<double> w(std::cos(step), std::sin(step));
      std::complex<double> rot(1.0, 0.0);
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t t = 0; t < n; ++t) {
        acc += x_[t] * rot;
        rot *= w;
      }
      dft_[k] = acc;
    }
    have_dft_ = true;
  }
  return dft_;
}

const Decomposition* FeatureContext::decomposition() {
  if (!tried_decomp_) {
    tried_decomp_ = true;
    SalesSeries tmp;
    tmp.values = x_;
    tmp.frequency = frequency_;
    try {
      decomp_ = decompose(tmp);
      have_decomp_ = true;
    } catch (const TooShortError&) {
      have_decomp_ = false;
    }
  }
  return have_decomp_ ? &decomp_ : nullptr;
}

// ---------------------------------------------------------------------------
// Individual features

namespace {

double feat_count_below(FeatureContext& ctx, double t) {
  const auto& x = ctx.values();
  if (x.empty()) return kNaN;
  std::size_t cnt = 0;
  for (double v : x)
    if (v <= t) ++cnt;
  return static_cast<double>(cnt) / static_cast<double>(x.size());
}

double feat_fft(FeatureContext& ctx, FeatureKind kind, std::size_t k) {
  const auto& x = ctx.values();
  if (k >= x.size()) return kNaN;
  const auto c = ctx.dft()[k];
  switch (kind) {
    case FeatureKind::fft_real: return c.real();
    case FeatureKind::fft_imag: return c.imag();
    case FeatureKind::fft_abs: return std::abs(c);
    default: {
      double angle = std::atan2(c.imag(), c.real());
      if (angle <= -kPi) angle = kPi;
      return angle;
    }
  }
}

double feat_has_duplicate_max(FeatureContext& ctx) {
  const auto& x = ctx.values();
  if (x.empty()) return kNaN;
  const double mx = *std::max_element(x.begin(), x.end());
  return std::count(x.begin(), x.end(), mx) > 1 ? 1.0 : 0.0;
}

double feat_var_gt_std(FeatureContext& ctx) {
  if (ctx.values().size() < 2) return kNaN;
  return ctx.pop_var() > ctx.pop_std() ? 1.0 : 0.0;
}

double feat_number_crossing(FeatureContext& ctx, double m) {
  const auto& x = ctx.values();
  if (x.size() < 2) return kNaN;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if ((x[i] > m) != (x[i + 1] > m)) ++cnt;
  return static_cast<double>(cnt);
}

// Consecutive changes where both endpoints lie inside the quantile corridor.
// Empty selections aggregate to 0.
double feat_change_quantiles(FeatureContext& ctx, double ql, double qh, bool isabs,
                             bool agg_mean) {
  const auto& x = ctx.values();
  if (x.size() < 2 || ql >= qh) return x.size() < 2 ? kNaN : 0.0;
  const auto& sorted = ctx.sorted();
  auto q_at = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t idx = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(idx);
    if (idx + 1 < sorted.size()) return sorted[idx] * (1.0 - frac) + sorted[idx + 1] * frac;
    return sorted.back();
  };
  const double lo = q_at(ql), hi = q_at(qh);
  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const bool in0 = x[i] >= lo && x[i] <= hi;
    const bool in1 = x[i + 1] >= lo && x[i + 1] <= hi;
    if (in0 && in1) {
      double d = x[i + 1] - x[i];
      diffs.push_back(isabs ? std::fabs(d) : d);
    }
  }
  if (diffs.empty()) return 0.0;
  return agg_mean ? mean_of(diffs) : population_variance(diffs);
}

double feat_ratio_beyond_r_sigma(FeatureContext& ctx, double r) {
  const auto& x = ctx.values();
  if (x.empty()) return kNaN;
  const double m = ctx.mean(), s = ctx.pop_std();
  std::size_t cnt = 0;
  for (double v : x)
    if (std::fabs(v - m) > r * s) ++cnt;
  return static_cast<double>(cnt) / static_cast<double>(x.size());
}

double feat_large_standard_deviation(FeatureContext& ctx, double r) {
  const auto& x = ctx.values();
  if (x.size() < 2) return kNaN;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  return ctx.pop_std() > r * (*mx - *mn) ? 1.0 : 0.0;
}

double feat_agg_linear_trend(FeatureContext& ctx, std::size_t chunk_len, bool agg_var) {
  const auto& x = ctx.values();
  if (chunk_len == 0 || x.size() <= chunk_len) return kNaN;  // need >= 2 chunks
  std::vector<double> agg;
  for (std::size_t i = 0; i < x.size(); i += chunk_len) {
    const std::size_t end = std::min(i + chunk_len, x.size());
    std::vector<double> chunk(x.begin() + i, x.begin() + end);
    agg.push_back(agg_var ? population_variance(chunk)
                          : *std::max_element(chunk.begin(), chunk.end()));
  }
  std::vector<double> idx(agg.size());
  std::iota(idx.begin(), idx.end(), 0.0);
  const double r = pearson(idx, agg);
  return std::isnan(r) ? 0.0 : r;  // constant aggregate: no linear association
}

double ricker(double t, double width) {
  const double u = t / width;
  const double amp = 2.0 / (std::sqrt(3.0 * width) * std::pow(kPi, 0.25));
  return amp * (1.0 - u * u) * std::exp(-u * u / 2.0);
}

// Ricker-wavelet CWT, convolution mode "same"; value at `pos` for `width`.
double feat_cwt_coefficient(FeatureContext& ctx, double width, std::size_t pos) {
  const auto& x = ctx.values();
  const std::size_t n = x.size();
  if (pos >= n) return kNaN;
  const std::size_t wav_len = std::min<std::size_t>(static_cast<std::size_t>(10.0 * width), n);
  std::vector<double> wav(wav_len);
  for (std::size_t j = 0; j < wav_len; ++j)
    wav[j] = ricker(static_cast<double>(j) - (static_cast<double>(wav_len) - 1.0) / 2.0, width);
  const std::size_t offset = (wav_len - 1) / 2;
  // full convolution index = pos + offset
  const std::size_t target = pos + offset;
  double acc = 0.0;
  for (std::size_t j = 0; j < wav_len; ++j) {
    if (target < j) break;
    const std::size_t xi = target - j;
    if (xi < n) acc += x[xi] * wav[j];
  }
  return acc;
}

double feat_approximate_entropy(FeatureContext& ctx, int m, double r_frac) {
  const auto& x = ctx.values();
  const std::size_t n = x.size();
  if (n <= static_cast<std::size_t>(m + 1)) return kNaN;
  const double sd = ctx.pop_std();
  if (sd <= 0.0) return 0.0;
  const double tol = r_frac * sd;
  auto phi = [&](int mm) {
    const std::size_t cnt = n - static_cast<std::size_t>(mm) + 1;
    double sum_log = 0.0;
    for (std::size_t i = 0; i < cnt; ++i) {
      std::size_t matches = 0;
      for (std::size_t j = 0; j < cnt; ++j) {
        double max_diff = 0.0;
        for (int k = 0; k < mm; ++k)
          max_diff = std::max(max_diff, std::fabs(x[i + k] - x[j + k]));
        if (max_diff <= tol) ++matches;
      }
      sum_log += std::log(static_cast<double>(matches) / static_cast<double>(cnt));
    }
    return sum_log / static_cast<double>(cnt);
  };
  return std::fabs(phi(m) - phi(m + 1));
}

// Shannon entropy of the max-normalized one-sided periodogram, histogrammed
// into `bins` equal-width bins across the value range.
double feat_fourier_entropy(FeatureContext& ctx, int bins) {
  const auto& x = ctx.values();
  const std::size_t n = x.size();
  if (n < 4) return kNaN;
  const auto& spec = ctx.dft();
  std::vector<double> pxx;
  for (std::size_t k = 0; k <= n / 2; ++k) pxx.push_back(std::norm(spec[k]));
  const double mx = *std::max_element(pxx.begin(), pxx.end());
  if (mx <= 0.0) return 0.0;
  for (double& v : pxx) v /= mx;
  const double mn = *std::min_element(pxx.begin(), pxx.end());
  if (mn == 1.0) return 0.0;  // flat spectrum: single bin
  std::vector<std::size_t> hist(static_cast<std::size_t>(bins), 0);
  const double w = (1.0 - mn) / static_cast<double>(bins);
  for (double v : pxx) {
    auto b = static_cast<std::size_t>((v - mn) / w);
    if (b >= hist.size()) b = hist.size() - 1;
    ++hist[b];
  }
  double h = 0.0;
  for (std::size_t c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(pxx.size());
    h -= p * std::log(p);
  }
  return h;
}

// ADF t-statistic; regression with constant, no trend. Lag order minimizes
// AIC over 0..floor(12*(N/100)^(1/4)) on the common (maxlag-trimmed) sample,
// then the chosen order is refit on the full available sample.
double feat_adf_stat(FeatureContext& ctx) {
  const auto& y = ctx.values();
  const int n = static_cast<int>(y.size());
  if (n < 12) return kNaN;
  if (ctx.pop_var() <= 0.0) return kNaN;
  std::vector<double> dy(n - 1);
  for (int t = 0; t + 1 < n; ++t) dy[t] = y[t + 1] - y[t];

  int maxlag = static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25)));
  maxlag = std::max(0, std::min(maxlag, (n - 4) / 2 - 2));

  // rows indexed by dy position t in [first, n-1); regressors 1, y[t], dy[t-1-j]
  auto fit = [&](int p, int first, double* tstat) -> double {
    const int rows = (n - 1) - first;
    const int cols = 2 + p;
    if (rows <= cols) return kNaN;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd b(rows);
    for (int r = 0; r < rows; ++r) {
      const int t = first + r;
      b(r) = dy[t];
      X(r, 0) = 1.0;
      X(r, 1) = y[t];
      for (int j = 0; j < p; ++j) X(r, 2 + j) = dy[t - 1 - j];
    }
    Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    if (!lu.isInvertible()) return kNaN;
    Eigen::VectorXd beta = lu.solve(X.transpose() * b);
    const double ssr = (b - X * beta).squaredNorm();
    if (tstat) {
      const double sigma2 = ssr / static_cast<double>(rows - cols);
      const double var1 = lu.inverse()(1, 1) * sigma2;
      *tstat = var1 > 0.0 ? beta(1) / std::sqrt(var1) : kNaN;
    }
    return ssr;
  };

  int best_p = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  const int common_first = maxlag;
  const int common_rows = (n - 1) - common_first;
  for (int p = 0; p <= maxlag; ++p) {
    const double ssr = fit(p, common_first, nullptr);
    if (std::isnan(ssr) || ssr <= 0.0) continue;
    const double aic =
        common_rows * std::log(ssr / common_rows) + 2.0 * (p + 2);
    if (aic < best_aic) {
      best_aic = aic;
      best_p = p;
    }
  }
  double tstat = kNaN;
  fit(best_p, best_p, &tstat);
  return tstat;
}

// Normalized spectral entropy of the demeaned series: -sum p ln p / ln(K)
// over the one-sided periodogram (DC excluded).
double feat_spectral_entropy(FeatureContext& ctx) {
  const auto& x = ctx.values();
  const std::size_t n = x.size();
  if (n < 4) return kNaN;
  const auto& spec = ctx.dft();
  // |DFT(x - mean)|^2 at k>0 equals |DFT(x)|^2 there; reuse the cache.
  std::vector<double> p;
  for (std::size_t k = 1; k <= n / 2; ++k) p.push_back(std::norm(spec[k]));
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total <= 0.0) return kNaN;
  double h = 0.0;
  for (double v : p) {
    if (v <= 0.0) continue;
    const double q = v / total;
    h -= q * std::log(q);
  }
  return h / std::log(static_cast<double>(p.size()));
}

// Guerrero's method restricted to [0, 1]: minimize the coefficient of
// variation of s_i / m_i^(1-lambda) across season-length blocks.
double feat_boxcox_lambda(FeatureContext& ctx) {
  const auto& x = ctx.values();
  const std::size_t m = static_cast<std::size_t>(std::max(2, ctx.frequency()));
  const std::size_t nblocks = x.size() / m;
  std::vector<double> means, sds;
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::vector<double> block(x.begin() + b * m, x.begin() + (b + 1) * m);
    const double mu = mean_of(block);
    if (mu <= 0.0) continue;  // zero-demand blocks carry no ratio information
    means.push_back(mu);
    sds.push_back(std::sqrt(sample_variance(block)));
  }
  if (means.size() < 2) return kNaN;
  auto cv = [&](double lambda) {
    std::vector<double> r(means.size());
    for (std::size_t i = 0; i < means.size(); ++i)
      r[i] = sds[i] / std::pow(means[i], 1.0 - lambda);
    const double mu = mean_of(r);
    if (mu <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(sample_variance(r)) / mu;
  };
  if (!std::isfinite(cv(0.5))) return kNaN;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = cv(c), fd = cv(d);
  while (b - a > 1e-4) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = cv(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = cv(d);
    }
  }
  return (a + b) / 2.0;
}

double feat_adi(FeatureContext& ctx) {
  const auto& x = ctx.values();
  const std::size_t nz = x.size() - std::count(x.begin(), x.end(), 0.0);
  if (nz == 0) return kNaN;
  return static_cast<double>(x.size()) / static_cast<double>(nz);
}

double feat_cv2(FeatureContext& ctx) {
  std::vector<double> sizes;
  for (double v : ctx.values())
    if (v != 0.0) sizes.push_back(v);
  if (sizes.size() < 2) return kNaN;
  const double mu = mean_of(sizes);
  return sample_variance(sizes) / (mu * mu);
}

}  // namespace

double compute_feature(FeatureContext& ctx, const FeatureId& f) {
  auto param = [&](const std::string& key, double fallback) {
    const auto it = f.params.find(key);
    return it == f.params.end() ? fallback : it->second;
  };
  switch (f.kind) {
    case FeatureKind::count_below:
      return feat_count_below(ctx, param("t", 0.0));
    case FeatureKind::fft_real:
    case FeatureKind::fft_imag:
    case FeatureKind::fft_abs:
    case FeatureKind::fft_angle:
      return feat_fft(ctx, f.kind, static_cast<std::size_t>(param("k", 0.0)));
    case FeatureKind::trough: {
      const Decomposition* d = ctx.decomposition();
      if (!d) return kNaN;
      const auto it = std::min_element(d->seasonal_means.begin(), d->seasonal_means.end());
      return static_cast<double>(it - d->seasonal_means.begin()) + 1.0;
    }
    case FeatureKind::has_duplicate_max:
      return feat_has_duplicate_max(ctx);
    case FeatureKind::variance_larger_than_standard_deviation:
      return feat_var_gt_std(ctx);
    case FeatureKind::number_crossing:
      return feat_number_crossing(ctx, param("m", 1.0));
    case FeatureKind::change_quantiles:
      return feat_change_quantiles(ctx, param("ql", 0.0), param("qh", 1.0),
                                   param("isabs", 0.0) != 0.0, param("agg_mean", 1.0) != 0.0);
    case FeatureKind::ratio_beyond_r_sigma:
      return feat_ratio_beyond_r_sigma(ctx, param("r", 1.0));
    case FeatureKind::large_standard_deviation:
      return feat_large_standard_deviation(ctx, param("r", 0.3));
    case FeatureKind::agg_linear_trend:
      return feat_agg_linear_trend(ctx, static_cast<std::size_t>(param("chunk_len", 10.0)),
                                   param("agg_var", 1.0) != 0.0);
    case FeatureKind::cwt_coefficient:
      return feat_cwt_coefficient(ctx, param("width", 2.0),
                                  static_cast<std::size_t>(param("coeff", 12.0)));
    case FeatureKind::approximate_entropy:
      return feat_approximate_entropy(ctx, static_cast<int>(param("m", 2.0)),
                                      param("r", 0.5));
    case FeatureKind::fourier_entropy:
      return feat_fourier_entropy(ctx, static_cast<int>(param("bins", 5.0)));
    case FeatureKind::augmented_dickey_fuller_stat:
      return feat_adf_stat(ctx);
    case FeatureKind::e_acf1: {
      const Decomposition* d = ctx.decomposition();
      if (!d) return kNaN;
      std::vector<double> rem(d->remainder.begin() + d->valid_lo,
                              d->remainder.begin() + d->valid_hi);
      return lag1_autocorrelation(rem);
    }
    case FeatureKind::spectral_entropy:
      return feat_spectral_entropy(ctx);
    case FeatureKind::trend_strength: {
      const Decomposition* d = ctx.decomposition();
      return d ? d->trend_strength : kNaN;
    }
    case FeatureKind::seasonality_strength: {
      const Decomposition* d = ctx.decomposition();
      return d ? d->seasonality_strength : kNaN;
    }
    case FeatureKind::seasonal_period:
      return static_cast<double>(ctx.frequency());
    case FeatureKind::acf1:
      return lag1_autocorrelation(ctx.values());
    case FeatureKind::boxcox_lambda:
      return feat_boxcox_lambda(ctx);
    case FeatureKind::adi:
      return feat_adi(ctx);
    case FeatureKind::cv2:
      return feat_cv2(ctx);
  }
  return kNaN;
}

double compute_feature(const SalesSeries& s, const FeatureId& f) {
  FeatureContext ctx(s.values, s.frequency);
  return compute_feature(ctx, f);
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

FeatureId make_feature(FeatureKind kind, Level level, std::map<std::string, double> params = {}) {
  FeatureId f;
  f.kind = kind;
  f.level = level;
  f.params = std::move(params);
  auto p = [&](const std::string& key) { return f.params.at(key); };
  switch (kind) {
    case FeatureKind::count_below:
      f.name = "count_below_" + fmt_num(p("t"));
      break;
    case FeatureKind::fft_real:
      f.name = "fft_coefficient_real_" + fmt_num(p("k"));
      break;
    case FeatureKind::fft_imag:
      f.name = "fft_coefficient_imag_" + fmt_num(p("k"));
      break;
    case FeatureKind::fft_abs:
      f.name = "fft_coefficient_abs_" + fmt_num(p("k"));
      break;
    case FeatureKind::fft_angle:
      f.name = "fft_coefficient_angle_" + fmt_num(p("k"));
      break;
    case FeatureKind::trough:
      f.name = "trough";
      break;
    case FeatureKind::has_duplicate_max:
      f.name = "has_duplicate_max";
      break;
    case FeatureKind::variance_larger_than_standard_deviation:
      f.name = "variance_larger_than_standard_deviation";
      break;
    case FeatureKind::number_crossing:
      f.name = "number_crossing_" + fmt_num(p("m"));
      break;
    case FeatureKind::change_quantiles:
      f.name = std::string("change_quantiles_") + (p("agg_mean") != 0.0 ? "mean" : "var") +
               (p("isabs") != 0.0 ? "_abs" : "") + "_" + fmt_num(p("ql")) + "_" +
               fmt_num(p("qh"));
      break;
    case FeatureKind::ratio_beyond_r_sigma:
      f.name = "ratio_beyond_r_sigma_" + fmt_num(p("r"));
      break;
    case FeatureKind::large_standard_deviation:
      f.name = "large_standard_deviation_" + fmt_num(p("r"));
      break;
    case FeatureKind::agg_linear_trend:
      f.name = std::string("agg_linear_trend_rvalue_") + (p("agg_var") != 0.0 ? "var" : "max") +
               "_" + fmt_num(p("chunk_len"));
      break;
    case FeatureKind::cwt_coefficient:
      f.name = "cwt_coefficient_w" + fmt_num(p("width")) + "_" + fmt_num(p("coeff"));
      break;
    case FeatureKind::approximate_entropy:
      f.name = "approximate_entropy_m" + fmt_num(p("m")) + "_r" + fmt_num(p("r"));
      break;
    case FeatureKind::fourier_entropy:
      f.name = "fourier_entropy_bins" + fmt_num(p("bins"));
      break;
    case FeatureKind::augmented_dickey_fuller_stat:
      f.name = "augmented_dickey_fuller_stat";
      break;
    case FeatureKind::e_acf1:
      f.name = "e_acf1";
      break;
    case FeatureKind::spectral_entropy:
      f.name = "spectral_entropy";
      break;
    case FeatureKind::trend_strength:
      f.name = "trend_strength";
      break;
    case FeatureKind::seasonality_strength:
      f.name = "seasonality_strength";
      break;
    case FeatureKind::seasonal_period:
      f.name = "seasonal_period";
      break;
    case FeatureKind::acf1:
      f.name = "acf1";
      break;
    case FeatureKind::boxcox_lambda:
      f.name = "boxcox_lambda";
      break;
    case FeatureKind::adi:
      f.name = "adi";
      break;
    case FeatureKind::cv2:
      f.name = "cv2";
      break;
  }
  return f;
}

}  // namespace

std::vector<FeatureId> validation_catalog() {
  std::vector<FeatureId> out;
  for (Level level : {Level::daily, Level::weekly, Level::monthly}) {
    for (FeatureKind kind :
         {FeatureKind::spectral_entropy, FeatureKind::trend_strength,
          FeatureKind::seasonality_strength, FeatureKind::seasonal_period, FeatureKind::acf1,
          FeatureKind::boxcox_lambda, FeatureKind::adi, FeatureKind::cv2})
      out.push_back(make_feature(kind, level));
  }
  return out;
}

std::vector<FeatureId> full_catalog() {
  std::vector<FeatureId> out;
  const Level D = Level::daily, W = Level::weekly, M = Level::monthly;
  auto add = [&](FeatureKind kind, Level level, std::map<std::string, double> params = {}) {
    out.push_back(make_feature(kind, level, std::move(params)));
  };
  // Daily (10)
  add(FeatureKind::count_below, D, {{"t", 0.0}});
  add(FeatureKind::fft_angle, D, {{"k", 63}});
  add(FeatureKind::trough, D);
  add(FeatureKind::fft_angle, D, {{"k", 73}});
  add(FeatureKind::has_duplicate_max, D);
  add(FeatureKind::fft_angle, D, {{"k", 1}});
  add(FeatureKind::fft_angle, D, {{"k", 22}});
  add(FeatureKind::fft_angle, D, {{"k", 59}});
  add(FeatureKind::variance_larger_than_standard_deviation, D);
  add(FeatureKind::fft_angle, D, {{"k", 26}});
  // Weekly (22)
  add(FeatureKind::fft_angle, W, {{"k", 26}});
  add(FeatureKind::augmented_dickey_fuller_stat, W);
  add(FeatureKind::change_quantiles, W, {{"ql", 0.8}, {"qh", 1.0}, {"isabs", 1}, {"agg_mean", 1}});
  add(FeatureKind::fft_imag, W, {{"k", 47}});
  add(FeatureKind::fft_real, W, {{"k", 36}});
  add(FeatureKind::number_crossing, W, {{"m", 1.0}});
  add(FeatureKind::fft_angle, W, {{"k", 2}});
  add(FeatureKind::fft_angle, W, {{"k", 5}});
  add(FeatureKind::fft_imag, W, {{"k", 44}});
  add(FeatureKind::cwt_coefficient, W, {{"width", 2}, {"coeff", 12}});
  add(FeatureKind::fft_real, W, {{"k", 38}});
  add(FeatureKind::fft_real, W, {{"k", 42}});
  add(FeatureKind::fft_angle, W, {{"k", 20}});
  add(FeatureKind::fft_imag, W, {{"k", 49}});
  add(FeatureKind::agg_linear_trend, W, {{"chunk_len", 10}, {"agg_var", 1}});
  add(FeatureKind::fft_real, W, {{"k", 45}});
  add(FeatureKind::fft_real, W, {{"k", 46}});
  add(FeatureKind::fft_imag, W, {{"k", 46}});
  add(FeatureKind::fft_abs, W, {{"k", 49}});
  add(FeatureKind::approximate_entropy, W, {{"m", 2}, {"r", 0.5}});
  add(FeatureKind::fft_real, W, {{"k", 43}});
  add(FeatureKind::fft_real, W, {{"k", 48}});
  // Monthly (10)
  add(FeatureKind::fft_angle, M, {{"k", 1}});
  add(FeatureKind::fft_angle, M, {{"k", 2}});
  add(FeatureKind::fourier_entropy, M, {{"bins", 5}});
  add(FeatureKind::change_quantiles, M, {{"ql", 0.2}, {"qh", 0.4}, {"isabs", 1}, {"agg_mean", 1}});
  add(FeatureKind::ratio_beyond_r_sigma, M, {{"r", 1.0}});
  add(FeatureKind::e_acf1, M);
  add(FeatureKind::change_quantiles, M, {{"ql", 0.2}, {"qh", 0.4}, {"isabs", 0}, {"agg_mean", 0}});
  add(FeatureKind::change_quantiles, M, {{"ql", 0.4}, {"qh", 0.6}, {"isabs", 0}, {"agg_mean", 0}});
  add(FeatureKind::large_standard_deviation, M, {{"r", 0.3}});
  add(FeatureKind::agg_linear_trend, M, {{"chunk_len", 5}, {"agg_var", 0}});
  // Validation set (8 x 3 levels)
  for (auto& f : validation_catalog()) out.push_back(std::move(f));
  return out;
}

// ---------------------------------------------------------------------------
// Matrix extraction

FeatureMatrix extract_matrix(const LabeledDataset& ds, const std::vector<FeatureId>& catalog,
                             const std::vector<Level>& levels, int threads) {
  if (catalog.empty()) throw ParamError("extract_matrix: empty catalog");
  FeatureMatrix m;
  m.feature_ids = catalog;
  m.series_ids.reserve(ds.series.size());
  for (const auto& s : ds.series) m.series_ids.push_back(s.id);
  m.values = Matrix(ds.series.size(), catalog.size(), kNaN);

  auto level_enabled = [&](Level level) {
    return std::find(levels.begin(), levels.end(), level) != levels.end();
  };

  parallel_for(ds.series.size(), threads, [&](std::size_t r) {
    const SalesSeries& s = ds.series[r];
    std::map<Level, std::unique_ptr<FeatureContext>> ctxs;
    auto context_for = [&](Level level) -> FeatureContext* {
      auto it = ctxs.find(level);
      if (it != ctxs.end()) return it->second.get();
      std::unique_ptr<FeatureContext> ctx;
      if (level == ds.level) {
        ctx = std::make_unique<FeatureContext>(s.values, s.frequency);
      } else if (ds.level == Level::daily) {
        try {
          SalesSeries agg = aggregate(s, level);
          ctx = std::make_unique<FeatureContext>(agg.values, agg.frequency);
        } catch (const TooShortError&) {
          ctx = nullptr;
        }
      }
      return ctxs.emplace(level, std::move(ctx)).first->second.get();
    };
    for (std::size_t c = 0; c < catalog.size(); ++c) {
      const FeatureId& f = catalog[c];
      if (!level_enabled(f.level)) continue;
      FeatureContext* ctx = context_for(f.level);
      if (!ctx) continue;
      m.values.at(r, c) = compute_feature(*ctx, f);
    }
  });
  return m;
}

}  // namespace tsrep
