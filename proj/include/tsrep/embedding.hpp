#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tsrep/common.hpp"

namespace tsrep {

struct PcaResult {
  Matrix scores;                         // rows x ncomp
  std::vector<double> explained_ratio;   // non-increasing, sums to <= 1
  Matrix loadings;                       // cols x ncomp; largest-|.| loading positive
};

// PCA of a column-standardized matrix via SVD. Throws when the matrix rank
// is below ncomp.
PcaResult pca(const Matrix& m, std::size_t ncomp);

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
  double learning_rate = 200.0;
  double momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iter = 250;
  std::uint64_t seed = 0;
  double init_scale = 1e-4;
};

struct PerplexityFit {
  double sigma = 0.0;
  std::vector<double> probs;  // conditional distribution over the other points
  int iterations = 0;
};

// Binary search for the Gaussian bandwidth whose conditional distribution
// over `squared_distances` has the target perplexity (within 1e-5, at most
// 200 iterations). `row` only labels error messages.
PerplexityFit perplexity_search(const std::vector<double>& squared_distances, double target,
                                int row = -1);

enum class EmbedMethod { pca, tsne };

struct Embedding2D {
  std::vector<std::string> series_ids;
  std::vector<std::string> dataset_tags;
  std::vector<double> x;
  std::vector<double> y;
  EmbedMethod method = EmbedMethod::tsne;
  std::vector<std::pair<int, double>> kl_trace;  // (iteration, KL) every 50 iters
};

// Symmetrized, normalized t-SNE input similarities (n x n, row-major);
// sums to 1.
std::vector<double> tsne_joint_probabilities(const Matrix& m, double perplexity);

// Exact O(n^2) t-SNE with PCA initialization (first two components rescaled
// to standard deviation init_scale per dimension). Deterministic for a given
// input and config.
Embedding2D tsne(const Matrix& m, const TsneConfig& cfg);

void write_embedding_csv(const Embedding2D& e, const std::string& path);
Embedding2D load_embedding_csv(const std::string& path);

}  // namespace tsrep
