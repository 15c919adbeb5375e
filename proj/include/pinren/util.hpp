#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace pinren {

// splitmix64 finalizer; good enough to decorrelate seed material.
std::uint64_t mix64(std::uint64_t x);

// Thin wrapper over mt19937_64.  Uniforms are built from the raw bits
// directly so streams are identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t bits() { return eng_(); }
  // [0, 1), 53-bit resolution
  double uniform() { return (double)(eng_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 eng_;
};

// Per-worker stream: identical results no matter how replicas are
// distributed over threads.
Rng worker_rng(std::uint64_t base_seed, std::uint64_t worker);

struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// Streaming log(sum exp(x_i)) with a running max, no second pass.
class LogSum {
public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max_) {
      acc_ += std::exp(x - max_);
    } else {
      acc_ = acc_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const {
    if (acc_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(acc_);
  }

private:
  double max_ = -std::numeric_limits<double>::infinity();
  double acc_ = 0.0;
};

// Compensated dot products: plain sums inside ~1k blocks, Kahan across
// blocks.  Keeps long convolutions at ~1e-13 relative error without
// long-double arithmetic.
double block_dot(const double* a, const double* b, std::size_t n);

// sum_{j=1}^{n} a[j] * b[n-j]  (discrete convolution step)
double block_dot_rev(const double* a, const double* b, std::size_t n);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_err = 0.0; // OLS standard error of the slope
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Static partition of [0, n) over worker threads.  The partition depends
// only on n and threads, and workers write disjoint state, so results are
// byte-identical for any thread count.  `run(begin, end)` must not throw.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& run);

} // namespace pinren
