#include "pinren/homogeneous.hpp"

#include "pinren/special.hpp"

#include <cmath>
#include <stdexcept>

namespace pinren {

namespace {

// Bisection for phi(x) = target on [0, hi0], phi strictly decreasing with
// phi(0) > target.  Newton degrades near the critical point where phi' can
// blow up or vanish, bisection does not care.  Runs to a machine-adjacent
// interval, which beats any realistic phi-space tolerance, so tol is a
// contract floor rather than a stopping knob.
template <typename Phi>
double bisect_free_energy(Phi&& phi, double target, double hi0) {
  double lo = 0.0, hi = hi0;
  for (int it = 0; it < 200 && hi - lo > 1e-18 + 2e-16 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    double v = phi(mid) - target;
    if (v == 0.0) return mid;
    if (v > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

double solve_free_energy(const PowerLawRenewal& law, double h, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_free_energy: tol must be positive");
  double mass = std::exp(law.tilt);
  double target = std::exp(-h);
  if (target >= mass) return 0.0; // h <= h_crit = -log(mass)
  const PolylogExp& li = shared_polylog(1.0 + law.exponent);
  auto phi = [&](double x) { return laplace_transform(law, li, x); };
  return bisect_free_energy(phi, target, std::max(h, 0.0) + 1.0);
}

double solve_free_energy(const TabulatedLaw& law, double h, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_free_energy: tol must be positive");
  double mass = law.mass();
  double target = std::exp(-h);
  if (!(mass > 0.0) || target >= mass) return 0.0;
  double hi0 = std::max(h, 0.0) + std::max(0.0, std::log(mass)) + 1.0;
  auto phi = [&](double x) { return law.laplace(x); };
  return bisect_free_energy(phi, target, hi0);
}

double free_energy_slope(const PowerLawRenewal& law, double h, double tol) {
  double f = solve_free_energy(law, h, tol);
  if (f <= 0.0) return 0.0;
  // sum_n n K(n) e^{-nf} = e^tilt c Li_alpha(e^{-f}), with the log form at
  // alpha = 1 where Li_1 telescopes
  double a = law.exponent;
  double m1;
  if (std::fabs(a - 1.0) < 1e-9) {
    m1 = -std::log(-std::expm1(-f));
  } else {
    m1 = shared_polylog(a).value({-f, 0.0}).real();
  }
  m1 *= law.prefactor * std::exp(law.tilt);
  return std::exp(-h) / m1;
}

FreeEnergyCurve sample_free_energy(const PowerLawRenewal& law,
                                   const std::vector<double>& hs, double tol) {
  FreeEnergyCurve curve;
  curve.samples.reserve(hs.size());
  curve.derivative_samples.reserve(hs.size());
  for (double h : hs) {
    curve.samples.emplace_back(h, solve_free_energy(law, h, tol));
    curve.derivative_samples.emplace_back(h, free_energy_slope(law, h, tol));
  }
  return curve;
}

LineFit critical_exponent_fit(const FreeEnergyCurve& curve, double lo, double hi) {
  if (!(0.0 < lo && lo < hi && hi <= 1.0))
    throw std::invalid_argument("critical_exponent_fit: need 0 < lo < hi <= 1");
  std::vector<double> lx, ly;
  for (const auto& [h, f] : curve.samples) {
    if (h >= lo && h <= hi && f > 0.0) {
      lx.push_back(std::log(h));
      ly.push_back(std::log(f));
    }
  }
  if (lx.size() < 8)
    throw std::invalid_argument("critical_exponent_fit: fewer than 8 usable points");
  return fit_line(lx, ly);
}

ExpansionReport free_energy_expansion_check(const PowerLawRenewal& law, double h) {
  double a = law.exponent;
  if (!(a > 1.0))
    throw std::domain_error("free_energy_expansion_check: exponent must exceed 1");
  if (!law.recurrent())
    throw std::domain_error("free_energy_expansion_check: law must be recurrent");
  if (!(h >= 0.0) || h > 0.05)
    throw std::domain_error("free_energy_expansion_check: h outside [0, 0.05]");

  ExpansionReport r{};
  r.log_corrected = std::fabs(a - 2.0) < 1e-9;
  if (h == 0.0) {
    r.ratio = 1.0;
    return r;
  }
  double c = law.prefactor;
  double mu = law.mean_gap();
  r.f = solve_free_energy(law, h, 1e-12);
  r.linear = h / mu;
  r.correction = r.f - r.linear;
  if (r.log_corrected) {
    // variance diverges logarithmically, the quadratic term picks up |log h|
    r.predicted = c * h * h * std::log(1.0 / h) / (2.0 * mu * mu * mu);
  } else if (a > 2.0) {
    double second = c * riemann_zeta(a - 1.0);
    double var = second - mu * mu;
    r.predicted = h * h * var / (2.0 * mu * mu * mu);
  } else {
    // c(a) = c_K * integral (e^{-t} - 1 + t) t^{-(1+a)} dt = c_K Gamma(-a),
    // positive on (1,2)
    r.predicted = c * std::tgamma(-a) * std::pow(h, a) / std::pow(mu, a + 1.0);
  }
  r.ratio = r.correction / r.predicted;
  return r;
}

double entropy_rate(const PowerLawRenewal& law, double theta) {
  if (theta < 0.0) throw std::domain_error("entropy_rate: theta must be nonnegative");
  if (theta == 0.0) return 0.0;
  double step = std::max(1e-6, theta / 100.0);
  double f = solve_free_energy(law, theta, 1e-12);
  double fp = (solve_free_energy(law, theta + step, 1e-12) -
               solve_free_energy(law, theta - step, 1e-12)) /
              (2.0 * step);
  double rate = theta * fp - f;
  return rate > 0.0 ? rate : 0.0;
}

} // namespace pinren
