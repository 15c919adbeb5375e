#include "pinren/util.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace pinren {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Rng worker_rng(std::uint64_t base_seed, std::uint64_t worker) {
  std::uint64_t s = mix64(base_seed ^ mix64(worker * 0x9e3779b97f4a7c15ull + 0x1d8e4e27c47d124full));
  return Rng(s);
}

double block_dot(const double* a, const double* b, std::size_t n) {
  constexpr std::size_t B = 1024;
  KahanSum outer;
  for (std::size_t i = 0; i < n; i += B) {
    std::size_t e = std::min(n, i + B);
    double s = 0.0;
    for (std::size_t j = i; j < e; ++j) s += a[j] * b[j];
    outer.add(s);
  }
  return outer.value();
}

double block_dot_rev(const double* a, const double* b, std::size_t n) {
  constexpr std::size_t B = 1024;
  KahanSum outer;
  for (std::size_t i = 1; i <= n; i += B) {
    std::size_t e = std::min(n + 1, i + B);
    double s = 0.0;
    for (std::size_t j = i; j < e; ++j) s += a[j] * b[n - j];
    outer.add(s);
  }
  return outer.value();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t m = x.size();
  if (m != y.size() || m < 2)
    throw std::invalid_argument("fit_line: need two samples or more");
  KahanSum sx, sy;
  for (std::size_t i = 0; i < m; ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  double mx = sx.value() / (double)m, my = sy.value() / (double)m;
  KahanSum sxx, sxy;
  for (std::size_t i = 0; i < m; ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  if (sxx.value() == 0.0)
    throw std::invalid_argument("fit_line: degenerate abscissa");
  LineFit f;
  f.slope = sxy.value() / sxx.value();
  f.intercept = my - f.slope * mx;
  if (m > 2) {
    KahanSum ss;
    for (std::size_t i = 0; i < m; ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      ss.add(r * r);
    }
    f.slope_err = std::sqrt(ss.value() / ((double)(m - 2) * sxx.value()));
  }
  return f;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& run) {
  if (n == 0) return;
  std::size_t t = threads < 1 ? 1 : (std::size_t)threads;
  t = std::min(t, n);
  if (t <= 1) {
    run(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t k = 0; k < t; ++k) {
    std::size_t b = n * k / t, e = n * (k + 1) / t;
    if (b < e) pool.emplace_back([&run, b, e] { run(b, e); });
  }
  for (auto& th : pool) th.join();
}

} // namespace pinren
