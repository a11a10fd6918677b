#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsrep {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Error hierarchy. Library functions throw; feature computations
// signal failed preconditions with NaN instead (see features.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};
class DataError : public Error {
 public:
  using Error::Error;
};
class CoverageError : public Error {
 public:
  using Error::Error;
};
class ParamError : public Error {
 public:
  using Error::Error;
};
class TooShortError : public Error {
 public:
  using Error::Error;
};
class PipelineError : public Error {
 public:
  using Error::Error;
};
class DivergenceError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
class UnclassifiableError : public Error {
 public:
  using Error::Error;
};

// Dense row-major matrix of doubles. NaN marks a missing cell.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }
};

// splitmix64; used to derive per-stage seeds from the run seed so stages
// can be rerun independently with identical streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stage_counter) {
  return splitmix64(run_seed ^ splitmix64(stage_counter));
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
// contiguous blocks, so results must not depend on execution order.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace tsrep
