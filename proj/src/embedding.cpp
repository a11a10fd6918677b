#include "tsrep/embedding.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tsrep/csv.hpp"

namespace tsrep {

PcaResult pca(const Matrix& m, std::size_t ncomp) {
  if (m.rows == 0 || m.cols == 0) throw ParamError("pca: empty matrix");
  if (ncomp == 0 || ncomp > std::min(m.rows, m.cols))
    throw ParamError("pca: ncomp outside [1, min(rows, cols)]");

  Eigen::MatrixXd X(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double v = m.at(r, c);
      if (std::isnan(v)) throw ParamError("pca: missing cell");
      X(r, c) = v;
    }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = std::max(m.rows, m.cols) * std::numeric_limits<double>::epsilon() *
                     (sv.size() > 0 ? sv(0) : 0.0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  if (rank < ncomp)
    throw ParamError("pca: matrix rank " + std::to_string(rank) + " below ncomp " +
                     std::to_string(ncomp));

  double total_var = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) total_var += sv(i) * sv(i);

  PcaResult out;
  out.scores = Matrix(m.rows, ncomp);
  out.loadings = Matrix(m.cols, ncomp);
  out.explained_ratio.resize(ncomp);
  for (std::size_t j = 0; j < ncomp; ++j) {
    Eigen::VectorXd v = svd.matrixV().col(j);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const double sign = v(imax) < 0.0 ? -1.0 : 1.0;
    const Eigen::VectorXd score = X * v * sign;
    for (std::size_t r = 0; r < m.rows; ++r) out.scores.at(r, j) = score(r);
    for (std::size_t c = 0; c < m.cols; ++c) out.loadings.at(c, j) = v(c) * sign;
    out.explained_ratio[j] = total_var > 0.0 ? sv(j) * sv(j) / total_var : 0.0;
  }
  return out;
}

PerplexityFit perplexity_search(const std::vector<double>& squared_distances, double target,
                                int row) {
  const std::size_t n = squared_distances.size();
  if (n == 0) throw ParamError("perplexity_search: empty distance row");
  if (target > static_cast<double>(n))
    throw ParamError("perplexity_search: target perplexity exceeds n-1");
  if (target <= 0.0) throw ParamError("perplexity_search: target must be positive");

  PerplexityFit fit;
  fit.probs.resize(n);
  double beta = 1.0;
  double beta_lo = -std::numeric_limits<double>::infinity();
  double beta_hi = std::numeric_limits<double>::infinity();
  const double tol = 1e-5;

  for (int iter = 1; iter <= 200; ++iter) {
    double sum_p = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      fit.probs[j] = std::exp(-beta * squared_distances[j]);
      sum_p += fit.probs[j];
    }
    if (sum_p <= 0.0) sum_p = std::numeric_limits<double>::min();
    double h = 0.0;  // entropy in nats
    for (std::size_t j = 0; j < n; ++j)
      h += beta * squared_distances[j] * fit.probs[j];
    h = h / sum_p + std::log(sum_p);
    const double perp = std::exp(h);
    fit.iterations = iter;
    if (std::fabs(perp - target) <= tol) {
      for (double& p : fit.probs) p /= sum_p;
      fit.sigma = std::sqrt(1.0 / (2.0 * beta));
      return fit;
    }
    if (perp > target) {
      beta_lo = beta;
      beta = std::isinf(beta_hi) ? beta * 2.0 : (beta + beta_hi) / 2.0;
    } else {
      beta_hi = beta;
      beta = std::isinf(beta_lo) ? beta / 2.0 : (beta + beta_lo) / 2.0;
    }
  }
  throw DivergenceError("perplexity_search: no convergence" +
                        (row >= 0 ? " at row " + std::to_string(row) : std::string()));
}

// Symmetrized, normalized input similarities (sums to 1).
std::vector<double> tsne_joint_probabilities(const Matrix& m, double perplexity) {
  const std::size_t n = m.rows;
  std::vector<double> d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < m.cols; ++c) {
        const double diff = m.at(i, c) - m.at(j, c);
        d += diff * diff;
      }
      d2[i * n + j] = d;
      d2[j * n + i] = d;
    }

  std::vector<double> p(n * n, 0.0);
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row[idx++] = d2[i * n + j];
    const PerplexityFit fit = perplexity_search(row, perplexity, static_cast<int>(i));
    idx = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) p[i * n + j] = fit.probs[idx++];
  }

  // symmetrize and normalize to a joint distribution (Kahan-compensated sum)
  double total = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = p[i * n + j] + p[j * n + i];
      p[i * n + j] = v;
      p[j * n + i] = v;
      const double y = 2.0 * v - comp;
      const double t = total + y;
      comp = (t - total) - y;
      total = t;
    }
  for (double& v : p) v /= total;
  return p;
}

namespace {

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q_weights,
                     double sum_q, std::size_t n) {
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double pij = p[i * n + j];
      if (pij <= 0.0) continue;
      const double qij = std::max(q_weights[i * n + j] / sum_q, 1e-300);
      kl += pij * std::log(pij / qij);
    }
  return kl;
}

}  // namespace

Embedding2D tsne(const Matrix& m, const TsneConfig& cfg) {
  const std::size_t n = m.rows;
  if (n < 10) throw ParamError("tsne: need at least 10 rows");
  for (double v : m.data)
    if (std::isnan(v)) throw ParamError("tsne: missing cell");
  if (cfg.perplexity >= (static_cast<double>(n) - 1.0) / 3.0)
    throw ParamError("tsne: perplexity must be below (n-1)/3");
  if (cfg.iterations < cfg.exaggeration_iters)
    throw ParamError("tsne: iterations must cover the exaggeration phase");

  std::vector<double> p = tsne_joint_probabilities(m, cfg.perplexity);

  // PCA initialization, each dimension rescaled to std init_scale
  const PcaResult init = pca(m, 2);
  std::vector<double> Y(n * 2);
  for (std::size_t d = 0; d < 2; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += init.scores.at(i, d);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = init.scores.at(i, d) - mean;
      var += dev * dev;
    }
    var /= static_cast<double>(n);
    const double scale = var > 0.0 ? cfg.init_scale / std::sqrt(var) : 0.0;
    for (std::size_t i = 0; i < n; ++i) Y[i * 2 + d] = (init.scores.at(i, d) - mean) * scale;
  }

  std::vector<double> velocity(n * 2, 0.0), gains(n * 2, 1.0), grad(n * 2, 0.0);
  std::vector<double> qw(n * n, 0.0);

  Embedding2D out;
  out.method = EmbedMethod::tsne;
  out.x.resize(n);
  out.y.resize(n);

  double momentum = cfg.momentum;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const bool exaggerating = iter < cfg.exaggeration_iters;
    const double p_scale = exaggerating ? cfg.early_exaggeration : 1.0;
    if (iter == cfg.momentum_switch_iter) momentum = cfg.final_momentum;

    double sum_q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = Y[i * 2] - Y[j * 2];
        const double dy = Y[i * 2 + 1] - Y[j * 2 + 1];
        const double w = 1.0 / (1.0 + dx * dx + dy * dy);
        qw[i * n + j] = w;
        qw[j * n + i] = w;
        sum_q += 2.0 * w;
      }
    }

    if (iter % 50 == 0)
      out.kl_trace.emplace_back(iter, kl_divergence(p, qw, sum_q, n));

    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = qw[i * n + j];
        const double mult = (p_scale * p[i * n + j] - w / sum_q) * w;
        grad[i * 2] += 4.0 * mult * (Y[i * 2] - Y[j * 2]);
        grad[i * 2 + 1] += 4.0 * mult * (Y[i * 2 + 1] - Y[j * 2 + 1]);
      }
    }

    for (std::size_t k = 0; k < n * 2; ++k) {
      if (!std::isfinite(grad[k]))
        throw DivergenceError("tsne: non-finite gradient at iteration " + std::to_string(iter));
      const bool same_sign = (grad[k] > 0.0) == (velocity[k] > 0.0);
      gains[k] = std::max(0.01, same_sign ? gains[k] * 0.8 : gains[k] + 0.2);
      velocity[k] = momentum * velocity[k] - cfg.learning_rate * gains[k] * grad[k];
      Y[k] += velocity[k];
    }
    // re-center
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += Y[i * 2];
      my += Y[i * 2 + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      Y[i * 2] -= mx;
      Y[i * 2 + 1] -= my;
    }
  }

  // final KL on the final layout
  double sum_q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = Y[i * 2] - Y[j * 2];
      const double dy = Y[i * 2 + 1] - Y[j * 2 + 1];
      const double w = 1.0 / (1.0 + dx * dx + dy * dy);
      qw[i * n + j] = w;
      qw[j * n + i] = w;
      sum_q += 2.0 * w;
    }
  out.kl_trace.emplace_back(cfg.iterations, kl_divergence(p, qw, sum_q, n));

  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = Y[i * 2];
    out.y[i] = Y[i * 2 + 1];
  }
  return out;
}

void write_embedding_csv(const Embedding2D& e, const std::string& path) {
  std::ostringstream out;
  out << "series_id,dataset_tag,dim1,dim2\n";
  out.precision(17);
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    out << csv_escape(i < e.series_ids.size() ? e.series_ids[i] : std::to_string(i)) << ","
        << csv_escape(i < e.dataset_tags.size() ? e.dataset_tags[i] : "") << "," << e.x[i]
        << "," << e.y[i] << "\n";
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << out.str();
}

Embedding2D load_embedding_csv(const std::string& path) {
  auto rows = read_csv(path);
  if (rows.size() < 2) throw SchemaError("file '" + path + "': empty embedding");
  const auto& header = rows.front();
  if (header.size() != 4 || header[0] != "series_id" || header[1] != "dataset_tag")
    throw SchemaError("file '" + path + "': expected series_id,dataset_tag,dim1,dim2");
  Embedding2D e;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 4)
      throw DataError("file '" + path + "', row " + std::to_string(r + 1) +
                      ": field count mismatch");
    e.series_ids.push_back(rows[r][0]);
    e.dataset_tags.push_back(rows[r][1]);
    try {
      e.x.push_back(std::stod(rows[r][2]));
      e.y.push_back(std::stod(rows[r][3]));
    } catch (const std::exception&) {
      throw DataError("file '" + path + "', row " + std::to_string(r + 1) +
                      ": bad coordinate");
    }
  }
  return e;
}

}  // namespace tsrep
