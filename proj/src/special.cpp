#include "pinren/special.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pinren {

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

double sin_pi(double x) {
  double n = std::round(x);
  double r = x - n; // |r| <= 1/2, exact
  double v = std::sin(kPi * r);
  if (std::fmod(std::fabs(n), 2.0) == 1.0) v = -v;
  return v;
}

double riemann_zeta(double s) {
  if (std::fabs(s - 1.0) < 1e-7)
    throw std::domain_error("riemann_zeta: pole at s = 1");
  if (s < 0.0) {
    // reflect to s > 1; sin_pi keeps the trivial zeros exact
    return std::pow(2.0, s) * std::pow(kPi, s - 1.0) * sin_pi(0.5 * s) *
           std::tgamma(1.0 - s) * riemann_zeta(1.0 - s);
  }
  if (s > 60.0) {
    double sum = 1.0;
    for (int n = 2; n <= 16; ++n) {
      double t = std::pow(n, -s);
      sum += t;
      if (t < 1e-18) break;
    }
    return sum;
  }
  // Euler-Maclaurin: head sum to N, then integral + boundary + four
  // Bernoulli corrections.  For s in (0, 60] the first omitted term is
  // below 1e-21 in absolute value.
  const int N = 2048;
  double sum = 0.0, c = 0.0;
  for (int n = 1; n <= N; ++n) {
    double t = std::pow((double)n, -s);
    double y = t - c;
    double u = sum + y;
    c = (u - sum) - y;
    sum = u;
  }
  const double Nd = (double)N;
  const double Ns = std::pow(Nd, -s);
  double v = sum - 0.5 * Ns + std::pow(Nd, 1.0 - s) / (s - 1.0);
  const double N2 = Nd * Nd;
  double p = s * Ns / Nd;
  v += p / 12.0;
  p *= (s + 1.0) * (s + 2.0) / N2;
  v -= p / 720.0;
  p *= (s + 3.0) * (s + 4.0) / N2;
  v += p / 30240.0;
  p *= (s + 5.0) * (s + 6.0) / N2;
  v -= p / 1209600.0;
  return v;
}

namespace {

// Euler-Maclaurin remainder sum_{n >= A} n^{-s}, A integral and large
// enough that four correction terms reach machine accuracy.
double power_tail_from(double s, double A) {
  double As = std::pow(A, -s);
  double r = std::pow(A, 1.0 - s) / (s - 1.0) + 0.5 * As;
  const double A2 = A * A;
  double p = s * As / A;
  r += p / 12.0;
  p *= (s + 1.0) * (s + 2.0) / A2;
  r -= p / 720.0;
  p *= (s + 3.0) * (s + 4.0) / A2;
  r += p / 30240.0;
  p *= (s + 5.0) * (s + 6.0) / A2;
  r -= p / 1209600.0;
  return r;
}

// Same for sum_{n >= A} n^{-s} ln(n), two correction terms.
double power_log_tail_from(double s, double A) {
  double L = std::log(A);
  double As = std::pow(A, -s);
  double sm1 = s - 1.0;
  double r = std::pow(A, 1.0 - s) * (L / sm1 + 1.0 / (sm1 * sm1));
  r += 0.5 * As * L;
  r += (s * L - 1.0) * As / (12.0 * A);
  r += (3.0 * s * s + 6.0 * s + 2.0 - s * (s + 1.0) * (s + 2.0) * L) * As /
       (720.0 * A * A * A);
  return r;
}

} // namespace

double zeta_tail(double s, double nmin) {
  if (s <= 1.0) throw std::domain_error("zeta_tail: requires s > 1");
  double start = std::floor(nmin) + 1.0;
  if (start < 1.0) start = 1.0;
  double A = std::ceil(std::max({start, 32.0, 8.0 * s}));
  double sum = 0.0, c = 0.0;
  for (double n = start; n < A; n += 1.0) {
    double t = std::pow(n, -s);
    double y = t - c;
    double u = sum + y;
    c = (u - sum) - y;
    sum = u;
  }
  return sum + power_tail_from(s, A);
}

double zeta_tail_log(double s, double nmin) {
  if (s <= 1.0) throw std::domain_error("zeta_tail_log: requires s > 1");
  double start = std::floor(nmin) + 1.0;
  if (start < 1.0) start = 1.0;
  double A = std::ceil(std::max({start, 64.0, 8.0 * s}));
  double sum = 0.0, c = 0.0;
  for (double n = start; n < A; n += 1.0) {
    double t = std::pow(n, -s) * std::log(n);
    double y = t - c;
    double u = sum + y;
    c = (u - sum) - y;
    sum = u;
  }
  return sum + power_log_tail_from(s, A);
}

PolylogExp::PolylogExp(double s) : s_(s) {
  double r = std::round(s);
  double d = std::fabs(s - r);
  if (d < 1e-9 && r >= 2.0) {
    integer_branch_ = true;
    s_int_ = (int)r;
    s_ = r;
    for (int k = 1; k < s_int_; ++k) harmonic_ += 1.0 / k;
  } else if (d < 1e-7) {
    throw std::domain_error("PolylogExp: order within 1e-7 of an integer");
  } else {
    gamma_one_minus_s_ = std::tgamma(1.0 - s);
  }

  // zeta(s-k)/k!; terms of the expansion decay like (|mu|/2pi)^k, so 160
  // coefficients cover |mu| <= 5 at machine accuracy.
  const int kmax = 160;
  zeta_coeff_.assign(kmax + 1, 0.0);
  double fact = 1.0;
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) fact *= k;
    if (integer_branch_ && k == s_int_ - 1) continue; // pole slot, handled by tail_term
    zeta_coeff_[k] = riemann_zeta(s_ - k) / fact;
  }
}

std::complex<double> PolylogExp::tail_term(std::complex<double> mu) const {
  std::complex<double> neg = -mu;
  if (integer_branch_) {
    // mu^{m-1}/(m-1)! * (H_{m-1} - log(-mu))
    std::complex<double> p = 1.0;
    double fact = 1.0;
    for (int k = 1; k < s_int_; ++k) {
      p *= mu;
      fact *= k;
    }
    return p / fact * (harmonic_ - std::log(neg));
  }
  return gamma_one_minus_s_ * std::pow(neg, s_ - 1.0);
}

std::complex<double> PolylogExp::value(std::complex<double> mu) const {
  std::complex<double> acc = tail_term(mu);
  std::complex<double> p = 1.0;
  int quiet = 0;
  for (std::size_t k = 0; k < zeta_coeff_.size(); ++k) {
    std::complex<double> term = zeta_coeff_[k] * p;
    acc += term;
    p *= mu;
    if (std::norm(term) < 1e-36 * std::norm(acc)) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return acc;
}

std::complex<double> PolylogExp::value_minus_const(std::complex<double> mu) const {
  std::complex<double> acc = tail_term(mu);
  std::complex<double> p = mu;
  int quiet = 0;
  for (std::size_t k = 1; k < zeta_coeff_.size(); ++k) {
    std::complex<double> term = zeta_coeff_[k] * p;
    acc += term;
    p *= mu;
    if (std::norm(term) < 1e-36 * std::norm(acc)) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return acc;
}

std::complex<double> PolylogExp::value_minus_const_sublinear(
    std::complex<double> mu) const {
  if (integer_branch_ && s_int_ == 2)
    throw std::domain_error(
        "PolylogExp: at s = 2 the linear part sits in the log term");
  std::complex<double> acc = tail_term(mu);
  std::complex<double> p = mu * mu;
  int quiet = 0;
  for (std::size_t k = 2; k < zeta_coeff_.size(); ++k) {
    std::complex<double> term = zeta_coeff_[k] * p;
    acc += term;
    p *= mu;
    if (std::norm(term) < 1e-36 * std::norm(acc)) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return acc;
}

namespace {

// log(1+z) and e^z - 1 with small-argument series; std::log/exp are fine
// once |z| is moderate but cancel catastrophically below ~1e-8.
std::complex<double> clog1p(std::complex<double> z) {
  if (std::abs(z) < 1e-4)
    return z * (1.0 + z * (-0.5 + z * (1.0 / 3.0 + z * -0.25)));
  return std::log(1.0 + z);
}

std::complex<double> cexpm1(std::complex<double> z) {
  if (std::abs(z) < 1e-4)
    return z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0))));
  return std::exp(z) - 1.0;
}

} // namespace

std::complex<double> PolylogExp::value_diff(double mu0, double t) const {
  if (!(mu0 < 0.0))
    throw std::domain_error("PolylogExp::value_diff: mu0 must be negative");
  double f = -mu0;
  std::complex<double> mu1(mu0, t);
  if (std::abs(mu1) > 5.5)
    throw std::domain_error("PolylogExp::value_diff: argument outside expansion disk");
  std::complex<double> it(0.0, t);
  // log(f - it) = log f + lr, exact for every ratio t/f
  std::complex<double> lr = clog1p(-it / f);

  std::complex<double> acc;
  if (integer_branch_) {
    // difference of mu^{m-1}/(m-1)! (H_{m-1} - log(-mu)) terms, with the
    // power difference d = mu0^{m-1} - mu1^{m-1} kept proportional to t
    std::complex<double> srun = 0.0, pw1 = 1.0;
    double pw0 = 1.0, fact = 1.0;
    for (int k = 1; k < s_int_; ++k) {
      srun = mu1 * srun + pw0;
      pw0 *= mu0;
      pw1 *= mu1;
      fact *= k;
    }
    std::complex<double> d = -it * srun;
    acc = (d * (harmonic_ - std::log(f)) + pw1 * lr) / fact;
  } else {
    // Gamma(1-s) [f^{s-1} - (f-it)^{s-1}]
    acc = gamma_one_minus_s_ * std::pow(f, s_ - 1.0) *
          (-cexpm1((s_ - 1.0) * lr));
  }

  // sum_k zeta(s-k)/k! (mu0^k - mu1^k); the k = 0 constants cancel exactly.
  // mu0^k - mu1^k = -it * sum_{j<k} mu1^j mu0^{k-1-j}, built by recurrence.
  std::complex<double> srun = 0.0;
  double pw0 = 1.0;
  int quiet = 0;
  for (std::size_t k = 1; k < zeta_coeff_.size(); ++k) {
    srun = mu1 * srun + pw0;
    pw0 *= mu0;
    std::complex<double> term = zeta_coeff_[k] * (-it) * srun;
    acc += term;
    if (std::norm(term) < 1e-36 * std::norm(acc)) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return acc;
}

const PolylogExp& shared_polylog(double s) {
  static std::mutex guard;
  static std::map<std::uint64_t, std::unique_ptr<PolylogExp>> cache;
  std::uint64_t key;
  std::memcpy(&key, &s, sizeof key);
  std::lock_guard<std::mutex> lock(guard);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<PolylogExp>(s);
  return *slot;
}

} // namespace pinren
