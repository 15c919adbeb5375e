#include "pinren/spectral.hpp"

#include "pinren/gauss16.hpp"
#include "pinren/homogeneous.hpp"
#include "pinren/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pinren {

namespace {

constexpr double kPi = std::numbers::pi;

// cos(nt) stays resolved by the degree-31 rule as long as n * width <= ~12.
constexpr const double* kGlNode = kGl16Node;
constexpr const double* kGlWeight = kGl16Weight;

// u(n) for an explicitly tabulated defect-free law, by the convolution
// recursion (same kernel as renewal_core's mass_function, for laws that a
// PowerLawRenewal cannot represent).
std::vector<double> convolve_mass(const std::vector<double>& kv, std::size_t n_max) {
  std::vector<double> u(n_max + 1, 0.0);
  u[0] = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n)
    u[n] = block_dot_rev(kv.data(), u.data(), n);
  return u;
}

} // namespace

CharacteristicFunction::CharacteristicFunction(const PowerLawRenewal& law,
                                               double theta)
    : law_(law), theta_(theta) {
  if (!(law.exponent > 1.0))
    throw std::domain_error("CharacteristicFunction: exponent must exceed 1");
  if (!law.recurrent())
    throw std::domain_error("CharacteristicFunction: law must be recurrent");
  if (theta < 0.0)
    throw std::domain_error("CharacteristicFunction: theta must be nonnegative");
  li_ = &shared_polylog(1.0 + law.exponent);
  if (theta == 0.0) {
    mean_ = law.mean_gap();
  } else {
    f_hat_ = solve_free_energy(law, theta, 1e-13);
    mean_ = std::exp(theta) * law.prefactor *
            shared_polylog(law.exponent).value({-f_hat_, 0.0}).real();
  }
}

std::complex<double> CharacteristicFunction::one_minus(double t) const {
  if (theta_ == 0.0) {
    // 1 - c Li(e^{it}) with the constant cancelled symbolically
    return -law_.prefactor * li_->value_minus_const({0.0, t});
  }
  if (f_hat_ <= 3.5) {
    return std::exp(theta_) * law_.prefactor * li_->value_diff(-f_hat_, t);
  }
  // strong tilt: the law decays like e^{-f_hat n}, sum the few surviving
  // terms of sum_n K_theta(n)(1 - e^{int}) directly
  double scale = std::exp(theta_);
  int nmax = (int)std::ceil(55.0 / f_hat_) + 4;
  KahanSum re, im;
  for (int n = 1; n <= nmax; ++n) {
    double w = scale * law_.k(n) * std::exp(-f_hat_ * n);
    double s = std::sin(0.5 * n * t);
    re.add(w * 2.0 * s * s);
    im.add(-w * std::sin(n * t));
  }
  return {re.value(), im.value()};
}

SpectralInverter::SpectralInverter(const PowerLawRenewal& law, double theta,
                                   std::size_t n_max,
                                   std::size_t quadrature_points) {
  if (quadrature_points < 1024)
    throw std::invalid_argument("SpectralInverter: quadrature budget below 1024");
  CharacteristicFunction cf(law, theta);
  mean_ = cf.mean();
  if (n_max == 0) n_max = 1;

  // width cap so the highest requested frequency stays inside the rule's
  // exactness; the dyadic floor is set so the neglected [0, floor] stub,
  // where R ~ t^{alpha-2} for alpha < 2, is below 1e-10
  double wmax = 12.0 / (double)std::max<std::size_t>(n_max, 200);
  double floor_exp =
      std::max(21.0, std::min(250.0, 10.0 / std::max(law.exponent - 1.0, 0.04)));
  double amin = std::pow(10.0, -floor_exp);

  auto count_panels = [&](double w) {
    std::size_t m = 0;
    for (double hi = kPi; hi > 2.0 * amin; hi *= 0.5)
      m += (std::size_t)std::ceil(0.5 * hi / w);
    return m;
  };
  std::size_t panels = count_panels(wmax);
  if (16 * panels > quadrature_points) {
    wmax *= (double)(16 * panels) / (double)quadrature_points;
    panels = count_panels(wmax);
  }
  t_.reserve(16 * panels);
  wr_.reserve(16 * panels);

  for (double hi = kPi; hi > 2.0 * amin; hi *= 0.5) {
    double lo = 0.5 * hi;
    std::size_t m = (std::size_t)std::ceil((hi - lo) / wmax);
    double step = (hi - lo) / (double)m;
    for (std::size_t i = 0; i < m; ++i) {
      double a = lo + step * (double)i;
      double mid = a + 0.5 * step, half = 0.5 * step;
      for (int q = 0; q < 16; ++q) {
        int j = q / 2;
        double x = (q % 2 == 0) ? -kGlNode[j] : kGlNode[j];
        double t = mid + half * x;
        std::complex<double> w = cf.one_minus(t);
        double r = 2.0 * w.real() / std::norm(w);
        t_.push_back(t);
        wr_.push_back(kGlWeight[j] * half * r);
      }
    }
  }
}

double SpectralInverter::mass(std::size_t n) const {
  if (n == 0) return 1.0; // the integral identity returns 2u(0) at n = 0
  KahanSum acc;
  for (std::size_t i = 0; i < t_.size(); ++i)
    acc.add(wr_[i] * std::cos((double)n * t_[i]));
  return 1.0 / mean_ + acc.value() / kPi;
}

double mass_by_inversion(const PowerLawRenewal& law, double theta, std::size_t n,
                         std::size_t quadrature_points) {
  SpectralInverter inv(law, theta, std::max<std::size_t>(n, 1), quadrature_points);
  return inv.mass(n);
}

PositivityReport uniform_positivity_probe(const PowerLawRenewal& law,
                                          const std::vector<double>& theta_grid,
                                          std::size_t n_max) {
  if (n_max == 0 || n_max > law.horizon)
    throw std::out_of_range("uniform_positivity_probe: n_max outside law horizon");
  PositivityReport rep;
  rep.min_mass = 2.0;
  for (double theta : theta_grid) {
    if (theta < 0.0)
      throw std::domain_error("uniform_positivity_probe: negative tilt");
    std::vector<double> kv(n_max + 1, 0.0);
    if (theta == 0.0) {
      for (std::size_t n = 1; n <= n_max; ++n) kv[n] = law.k(n);
    } else {
      double f = solve_free_energy(law, theta, 1e-13);
      double scale = std::exp(theta);
      for (std::size_t n = 1; n <= n_max; ++n)
        kv[n] = scale * law.k(n) * std::exp(-f * (double)n);
    }
    std::vector<double> u = convolve_mass(kv, n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
      if (u[n] < rep.min_mass) {
        rep.min_mass = u[n];
        rep.theta_at_min = theta;
        rep.n_at_min = n;
      }
    }
  }
  rep.positive = rep.min_mass > 0.0;
  return rep;
}

CfEstimateReport cf_estimate_probe(const PowerLawRenewal& law,
                                   const std::vector<double>& theta_grid,
                                   const std::vector<double>& t_grid) {
  if (theta_grid.empty() || t_grid.empty())
    throw std::invalid_argument("cf_estimate_probe: empty grid");
  double a2 = std::min(law.exponent, 2.0);
  bool log_factor = std::fabs(law.exponent - 2.0) < 1e-9;

  CfEstimateReport rep;
  rep.re_nonneg = true;
  rep.im_two_sided = true;
  double low_theta = *std::min_element(theta_grid.begin(), theta_grid.end());
  std::vector<double> lt, lim, lre;

  for (double theta : theta_grid) {
    CharacteristicFunction cf(law, theta);
    for (double t : t_grid) {
      if (!(t > 0.0) || t > kPi)
        throw std::invalid_argument("cf_estimate_probe: t grid must lie in (0, pi]");
      std::complex<double> w = cf.one_minus(t);
      double im = std::fabs(w.imag());
      double re = w.real();
      if (re < -1e-12) rep.re_nonneg = false;
      if (!(im > 0.0)) {
        rep.im_two_sided = false;
      } else {
        rep.im_constant = std::max({rep.im_constant, im / t, t / im});
      }
      double envelope = std::pow(t, a2) * (log_factor ? 1.0 + std::fabs(std::log(t)) : 1.0);
      rep.re_constant = std::max(rep.re_constant, re / envelope);
      if (theta == low_theta && re > 0.0 && im > 0.0) {
        lt.push_back(std::log(t));
        lim.push_back(std::log(im));
        lre.push_back(std::log(re));
      }
    }
  }
  if (lt.size() >= 2) {
    rep.im_slope = fit_line(lt, lim).slope;
    rep.re_slope = fit_line(lt, lre).slope;
  }
  return rep;
}

} // namespace pinren
