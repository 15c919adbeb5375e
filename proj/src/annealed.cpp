#include "pinren/annealed.hpp"

#include "pinren/gauss16.hpp"
#include "pinren/homogeneous.hpp"
#include "pinren/special.hpp"
#include "pinren/util.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pinren {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = std::numbers::pi;

void require_law(const PowerLawRenewal& law, const char* who, bool allow_tilt) {
  if (!(law.exponent > 0.0) || !std::isfinite(law.exponent))
    throw std::invalid_argument(std::string(who) +
                                ": law exponent must be positive");
  if (!allow_tilt && !law.recurrent())
    throw std::invalid_argument(std::string(who) +
                                ": law must be recurrent (tilt enters separately)");
  // the frequency identities assume exact unit normalization of the
  // underlying recurrent law; anything else would silently shift 1 - phi
  double z = law.prefactor * shared_polylog(1.0 + law.exponent).zeta_at_s();
  if (!(std::fabs(z - 1.0) <= 1e-9))
    throw std::invalid_argument(std::string(who) +
                                ": law is not unit-normalized");
}

void require_tol(double rel_tol, const char* who) {
  if (!(rel_tol >= 1e-11) || !(rel_tol <= 1e-2))
    throw std::invalid_argument(std::string(who) +
                                ": rel_tol must lie in [1e-11, 1e-2]");
}

// t - sin t without the subtraction; alternating series, four nested terms
// cover |t| <= 0.35 to ~3e-14 relative.
double t_minus_sin(double t) {
  if (t > 0.35) return t - std::sin(t);
  double t2 = t * t;
  return (t * t2 / 6.0) *
         (1.0 - (t2 / 20.0) *
                    (1.0 - (t2 / 42.0) * (1.0 - (t2 / 72.0) * (1.0 - t2 / 110.0))));
}

// Dyadic-octave sweep of (0, pi]: 16-point Gauss-Legendre per octave,
// descending until the measured tail closes below rel_tol relative to
// max(|accumulated|, floor_scale).  The ratio of consecutive octave sums is
// geometric once past the defect crossover (the integrands are regularly
// varying there), so r/(1-r) times the last octave bounds what is left; while
// the sums still grow toward the crossover the estimate is withheld.  Caller
// supplies floor_scale in raw-integral units (a known lower bound on the
// final |integral|), which keeps early near-zero partial sums from stopping
// the descent.
template <typename F>
double integrate_octaves(F&& f, double floor_scale, double rel_tol,
                         const char* who) {
  constexpr int kmin = 12, kcap = 760;
  KahanSum acc;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0; // |octave sum| history
  int zero_run = 0;
  for (int k = 0; k < kcap; ++k) {
    double b = kPi * std::ldexp(1.0, -k);
    double mid = 0.75 * b, half = 0.25 * b; // octave [b/2, b]
    double osum = 0.0;
    for (int j = 0; j < 8; ++j) {
      double dx = half * kGl16Node[j];
      osum += kGl16Weight[j] * (f(mid - dx) + f(mid + dx));
    }
    osum *= half;
    if (!std::isfinite(osum))
      throw std::runtime_error(std::string(who) +
                               ": frequency integrand blew up");
    acc.add(osum);
    c3 = c2;
    c2 = c1;
    c1 = c0;
    c0 = std::fabs(osum);
    if (osum == 0.0) {
      if (++zero_run >= 3 && k >= kmin) return acc.value();
    } else {
      zero_run = 0;
    }
    if (k < kmin) continue;
    double r = 0.0;
    r = std::max(r, c1 > 0.0 ? c0 / c1 : (c0 > 0.0 ? 1.0 : 0.0));
    r = std::max(r, c2 > 0.0 ? c1 / c2 : (c1 > 0.0 ? 1.0 : 0.0));
    r = std::max(r, c3 > 0.0 ? c2 / c3 : (c2 > 0.0 ? 1.0 : 0.0));
    if (r >= 1.0) continue; // still climbing toward the crossover
    r = std::min(r, 0.98);
    double tail = std::max(c0, c1) * r / (1.0 - r);
    double scale = std::max(std::fabs(acc.value()), floor_scale);
    if (tail <= 0.25 * rel_tol * scale) return acc.value();
  }
  throw std::runtime_error(
      std::string(who) +
      ": octave sweep cannot certify the tolerance (near-marginal exponents)");
}

// zeta(s - 1) with the same bits the polylog table uses for its linear
// coefficient; the finite-mean numerator cancels that term symbolically and
// any mismatch would resurface amplified by t^{-2} near the origin.
double subtracted_mean(const PowerLawRenewal& disorder, const PolylogExp& li) {
  return disorder.prefactor * riemann_zeta(li.s() - 1.0);
}

double excess_impl(const PowerLawRenewal& base, const PowerLawRenewal& disorder,
                   double h, double rel_tol, const char* who) {
  double eh = std::exp(h);
  double d = -std::expm1(h);
  const PolylogExp& lib = shared_polylog(1.0 + base.exponent);
  const PolylogExp& lid = shared_polylog(1.0 + disorder.exponent);
  double chat = disorder.prefactor;
  double zsm1 = riemann_zeta(lid.s() - 1.0);
  double mu_hat = chat * zsm1;
  if (eh <= 0.25 * rel_tol) return 1.0 - 1.0 / mu_hat;
  double cb = base.prefactor;
  auto f = [&](double t) {
    cplx vs = lid.value_minus_const_sublinear(cplx(0.0, t));
    double sh = std::sin(0.5 * t);
    // e^{it} - 1 - it with the linear part gone analytically
    cplx em(2.0 * sh * sh, t_minus_sin(t));
    cplx num = chat * (vs + zsm1 * em);
    cplx phat = -chat * (vs + cplx(0.0, zsm1 * t));
    cplx q(2.0 * sh * sh, -std::sin(t)); // 1 - e^{it}
    cplx den = cplx(d, 0.0) + eh * (-cb * lib.value_minus_const(cplx(0.0, t)));
    return (num / (mu_hat * phat * q * std::conj(den))).real();
  };
  double floor_scale = kPi * (1.0 - 1.0 / mu_hat);
  return integrate_octaves(f, floor_scale, rel_tol, who) / kPi;
}

} // namespace

double intersection_sum(const PowerLawRenewal& base,
                        const PowerLawRenewal& disorder, double h,
                        double rel_tol) {
  require_law(base, "intersection_sum", false);
  require_law(disorder, "intersection_sum", false);
  require_tol(rel_tol, "intersection_sum");
  if (!(h < 0.0))
    throw std::domain_error(
        "intersection_sum: needs h < 0 (the tilted chain must be defective)");
  double eh = std::exp(h);
  double d = -std::expm1(h);
  if (eh <= 0.25 * rel_tol) return 1.0 / d;
  if (disorder.exponent > 1.0) {
    const PolylogExp& lid = shared_polylog(1.0 + disorder.exponent);
    double mu_hat = subtracted_mean(disorder, lid);
    return 1.0 / (mu_hat * d) +
           excess_impl(base, disorder, h, rel_tol, "intersection_sum");
  }
  const PolylogExp& lib = shared_polylog(1.0 + base.exponent);
  const PolylogExp& lid = shared_polylog(1.0 + disorder.exponent);
  double cb = base.prefactor, cd = disorder.prefactor;
  auto f = [&](double t) {
    cplx phat = -cd * lid.value_minus_const(cplx(0.0, t));
    cplx den = cplx(d, 0.0) + eh * (-cb * lib.value_minus_const(cplx(0.0, t)));
    return (1.0 / (phat * std::conj(den))).real();
  };
  return integrate_octaves(f, kPi, rel_tol, "intersection_sum") / kPi;
}

double intersection_sum_excess(const PowerLawRenewal& base,
                               const PowerLawRenewal& disorder, double h,
                               double rel_tol) {
  require_law(base, "intersection_sum_excess", false);
  require_law(disorder, "intersection_sum_excess", false);
  require_tol(rel_tol, "intersection_sum_excess");
  if (!(disorder.exponent > 1.0))
    throw std::domain_error(
        "intersection_sum_excess: disorder mean diverges, nothing to subtract");
  if (!(h < 0.0))
    throw std::domain_error("intersection_sum_excess: needs h < 0");
  return excess_impl(base, disorder, h, rel_tol, "intersection_sum_excess");
}

OverlapValue intersection_sum_at_zero(const PowerLawRenewal& base,
                                      const PowerLawRenewal& disorder,
                                      double rel_tol) {
  require_law(base, "intersection_sum_at_zero", false);
  require_law(disorder, "intersection_sum_at_zero", false);
  require_tol(rel_tol, "intersection_sum_at_zero");
  double se = base.exponent + disorder.exponent;
  OverlapValue out;
  if (std::fabs(se - 1.0) <= 1e-9) {
    out.cls = OverlapClass::boundary;
    return out;
  }
  if (se > 1.0) {
    out.cls = OverlapClass::divergent;
    return out;
  }
  const PolylogExp& lib = shared_polylog(1.0 + base.exponent);
  const PolylogExp& lid = shared_polylog(1.0 + disorder.exponent);
  double cb = base.prefactor, cd = disorder.prefactor;
  auto f = [&](double t) {
    cplx phat = -cd * lid.value_minus_const(cplx(0.0, t));
    cplx p = -cb * lib.value_minus_const(cplx(0.0, t));
    return (1.0 / (phat * std::conj(p))).real();
  };
  out.cls = OverlapClass::finite;
  out.value =
      integrate_octaves(f, kPi, rel_tol, "intersection_sum_at_zero") / kPi;
  return out;
}

double return_probability(double overlap) {
  if (std::isnan(overlap))
    throw std::domain_error("return_probability: overlap is NaN");
  if (std::isinf(overlap) && overlap > 0.0) return 1.0;
  if (overlap < 1.0)
    throw std::domain_error(
        "return_probability: overlap below 1 cannot come from a renewal pair");
  return 1.0 - 1.0 / overlap;
}

double beta_zero(const PowerLawRenewal& base, const PowerLawRenewal& disorder,
                 double rel_tol) {
  OverlapValue v = intersection_sum_at_zero(base, disorder, rel_tol);
  if (v.cls == OverlapClass::boundary)
    throw std::domain_error(
        "beta_zero: exponent sum within 1e-9 of 1, overlap class undecidable");
  if (v.cls == OverlapClass::divergent) return 0.0;
  return -std::log1p(-1.0 / v.value);
}

namespace {

// Root of I(h) = 1/(1 - e^{-beta}) in log(-h); callers guarantee
// beta > beta0 so the bracket [1e-16, 35] contains the root or the failure
// is genuine.
// the power-law formula does not depend on the horizon, so tabulating past
// it is exact; keep the caller's law intact and widen a copy
PowerLawRenewal with_horizon(const PowerLawRenewal& law, std::size_t n) {
  PowerLawRenewal out = law;
  if (out.horizon < n) out.horizon = n;
  return out;
}

double critical_root(const PowerLawRenewal& base,
                     const PowerLawRenewal& disorder, double beta,
                     double rel_tol) {
  double itol = std::max(1e-11, 0.25 * rel_tol);
  double target = 1.0 / (-std::expm1(-beta));
  double ylo = 1e-16, yhi = 35.0;
  double muh = disorder.mean_gap();
  // the annealed curve sits strictly below the Jensen line, with margin
  // (the contact density exceeds its mean at every site), so beta/mu-hat is
  // a valid lower bracket for -h
  if (std::isfinite(muh)) ylo = std::max(ylo, 0.999 * beta / muh);
  auto overlap = [&](double y) {
    return intersection_sum(base, disorder, -y, itol);
  };
  if (!(overlap(ylo) > target))
    throw std::runtime_error(
        "annealed_critical_point: root below the smallest resolvable |h|");
  if (!(overlap(yhi) < target))
    throw std::runtime_error("annealed_critical_point: no root with |h| <= 35");
  double xlo = std::log(ylo), xhi = std::log(yhi);
  for (int it = 0; it < 120; ++it) {
    double xm = 0.5 * (xlo + xhi);
    double val = overlap(std::exp(xm));
    if (std::fabs(val - target) <= rel_tol * target) return -std::exp(xm);
    (val > target ? xlo : xhi) = xm;
    if (xhi - xlo < 1e-15) break;
  }
  double xm = 0.5 * (xlo + xhi);
  if (std::fabs(overlap(std::exp(xm)) - target) <= 16.0 * rel_tol * target)
    return -std::exp(xm);
  throw std::runtime_error(
      "annealed_critical_point: bisection exhausted without certifying the root");
}

} // namespace

double annealed_critical_point(const PowerLawRenewal& base,
                               const PowerLawRenewal& disorder, double beta,
                               double rel_tol) {
  require_law(base, "annealed_critical_point", false);
  require_law(disorder, "annealed_critical_point", false);
  if (!(rel_tol >= 1e-10) || !(rel_tol <= 1e-2))
    throw std::invalid_argument(
        "annealed_critical_point: rel_tol must lie in [1e-10, 1e-2]");
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument(
        "annealed_critical_point: beta must be finite and >= 0");
  if (beta == 0.0) return 0.0;
  if (beta > 30.0)
    throw std::domain_error(
        "annealed_critical_point: beta > 30 pushes I - 1 below double "
        "resolution, the root cannot be certified");
  double b0 = beta_zero(base, disorder, std::max(1e-11, 0.25 * rel_tol));
  if (beta <= b0) return 0.0;
  return critical_root(base, disorder, beta, rel_tol);
}

AnnealedCurve compute_annealed_curve(const PowerLawRenewal& base,
                                     const PowerLawRenewal& disorder,
                                     const std::vector<double>& beta_grid,
                                     int threads, double rel_tol) {
  require_law(base, "compute_annealed_curve", false);
  require_law(disorder, "compute_annealed_curve", false);
  if (!(rel_tol >= 1e-10) || !(rel_tol <= 1e-2))
    throw std::invalid_argument(
        "compute_annealed_curve: rel_tol must lie in [1e-10, 1e-2]");
  if (beta_grid.empty())
    throw std::invalid_argument("compute_annealed_curve: empty beta grid");
  for (double b : beta_grid)
    if (!(b >= 0.0) || !(b <= 30.0) || !std::isfinite(b))
      throw std::invalid_argument(
          "compute_annealed_curve: beta grid must lie in [0, 30]");
  AnnealedCurve out;
  out.beta_grid = beta_grid;
  out.hca.assign(beta_grid.size(), 0.0);
  out.beta0 = beta_zero(base, disorder, std::max(1e-11, 0.25 * rel_tol));
  std::vector<std::exception_ptr> errs(beta_grid.size());
  parallel_for(beta_grid.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        double b = beta_grid[i];
        out.hca[i] = (b <= out.beta0 || b == 0.0)
                         ? 0.0
                         : critical_root(base, disorder, b, rel_tol);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  });
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

ScalingFit annealed_gamma_fit(const PowerLawRenewal& base,
                              const PowerLawRenewal& disorder, double lo,
                              double hi, int points) {
  require_law(base, "annealed_gamma_fit", false);
  require_law(disorder, "annealed_gamma_fit", false);
  if (!(lo > 0.0) || !(hi > lo) || !(hi <= 1.0))
    throw std::invalid_argument(
        "annealed_gamma_fit: need 0 < lo < hi <= 1 for the scaling window");
  if (points < 5 || points > 64)
    throw std::invalid_argument("annealed_gamma_fit: points must be in [5, 64]");
  double a = base.exponent, ah = disorder.exponent;
  double am = std::min(a, 1.0);
  auto near = [](double x, double y) { return std::fabs(x - y) < 1e-9; };
  if (near(ah, 1.0) || near(a, 1.0) || near(ah, 1.0 + am) ||
      (a + ah < 1.0 && near(2.0 * a + ah, 1.0)))
    throw std::domain_error(
        "annealed_gamma_fit: log-corrected scaling regime, a clean power fit "
        "would misreport the exponent");
  double b0 = beta_zero(base, disorder, 1e-10); // boundary tuples throw here
  bool jensen_gap = ah > 1.0;
  double muh = jensen_gap ? disorder.mean_gap() : 0.0;
  ScalingFit out;
  out.abscissa.resize(points);
  out.response.resize(points);
  std::vector<double> lx(points), ly(points);
  for (int i = 0; i < points; ++i) {
    double x = lo * std::pow(hi / lo, (double)i / (points - 1));
    double beta = b0 + x;
    double h = critical_root(base, disorder, beta, 1e-9);
    double y = jensen_gap ? (-h - beta / muh) : -h;
    if (!(y > 0.0))
      throw std::runtime_error(
          "annealed_gamma_fit: scaling response vanished; window too wide");
    out.abscissa[i] = x;
    out.response[i] = y;
    lx[i] = std::log(x);
    ly[i] = std::log(y);
  }
  LineFit fit = fit_line(lx, ly);
  out.exponent = fit.slope;
  out.exponent_err = fit.slope_err;
  out.amplitude = std::exp(fit.intercept);
  return out;
}

namespace {

// First-passage law of the joint renewal: w(n) = u(n) uhat(n),
// f(n) = w(n) - sum_{m<n} f(m) w(n-m).  f stays positive: the subtracted
// mass is the part of w(n) that revisited the diagonal earlier.
std::vector<double> joint_first_passage(const std::vector<double>& u,
                                        const std::vector<double>& uhat) {
  std::size_t n_max = std::min(u.size(), uhat.size()) - 1;
  std::vector<double> w(n_max + 1), f(n_max + 1, 0.0);
  for (std::size_t n = 0; n <= n_max; ++n) w[n] = u[n] * uhat[n];
  for (std::size_t n = 1; n <= n_max; ++n)
    f[n] = w[n] - block_dot_rev(f.data(), w.data(), n);
  return f;
}

// 1/I(h), extended to h = 0 through the convergence class; 0 when the
// overlap sum diverges.
double inverse_overlap(const PowerLawRenewal& base,
                       const PowerLawRenewal& disorder, double h,
                       const char* who) {
  if (h < 0.0) return 1.0 / intersection_sum(base, disorder, h, 1e-10);
  OverlapValue v = intersection_sum_at_zero(base, disorder, 1e-10);
  if (v.cls == OverlapClass::boundary)
    throw std::domain_error(std::string(who) +
                            ": overlap at h = 0 sits on the classification "
                            "boundary, mass closure is undecidable");
  return v.cls == OverlapClass::finite ? 1.0 / v.value : 0.0;
}

} // namespace

IntersectionLaw build_intersection_law(const PowerLawRenewal& tilted_base,
                                       const PowerLawRenewal& disorder,
                                       double beta, std::size_t n_max) {
  require_law(tilted_base, "build_intersection_law", true);
  require_law(disorder, "build_intersection_law", false);
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument(
        "build_intersection_law: beta must be finite and >= 0");
  if (n_max < 16 || n_max > ((std::size_t)1 << 20))
    throw std::invalid_argument(
        "build_intersection_law: n_max must lie in [16, 2^20]");
  MassFunctionTable ut = mass_function(with_horizon(tilted_base, n_max), n_max);
  MassFunctionTable vt = mass_function(with_horizon(disorder, n_max), n_max);
  std::vector<double> f = joint_first_passage(ut.values, vt.values);
  double eb = std::exp(beta);
  std::vector<double> kt(n_max + 1, 0.0);
  KahanSum table_mass;
  for (std::size_t n = 1; n <= n_max; ++n) {
    kt[n] = eb * f[n];
    table_mass.add(kt[n]);
  }
  PowerLawRenewal base0 = tilted_base;
  base0.tilt = 0.0;
  double inv =
      inverse_overlap(base0, disorder, tilted_base.tilt, "build_intersection_law");
  double total = eb * (1.0 - inv);
  double tail_mass = total - table_mass.value();
  if (tail_mass < 0.0) {
    if (tail_mass < -1e-8 * total)
      throw std::logic_error(
          "build_intersection_law: table mass exceeds the overlap identity");
    tail_mass = 0.0;
  }
  double a = tilted_base.exponent, ah = disorder.exponent;
  double s_full;
  if (tilted_base.tilt < 0.0)
    s_full = 1.0 + a + std::max(0.0, 1.0 - ah);
  else
    s_full = a + ah > 1.0 ? a + ah : 2.0 - a - ah;
  double zt = tail_mass > 0.0 ? zeta_tail(s_full, (double)n_max) : 0.0;
  IntersectionLaw law;
  law.base = tilted_base;
  law.disorder = disorder;
  law.beta_tilt = beta;
  law.first_passage = std::move(kt);
  law.tail_amplitude = zt > 0.0 ? tail_mass / zt : 0.0;
  law.tail_exponent = s_full;
  law.total_mass = total;
  return law;
}

double annealed_free_energy(const PowerLawRenewal& base,
                            const PowerLawRenewal& disorder, double beta,
                            double h, std::size_t n_max) {
  require_law(base, "annealed_free_energy", false);
  require_law(disorder, "annealed_free_energy", false);
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument(
        "annealed_free_energy: beta must be finite and >= 0");
  if (!std::isfinite(h))
    throw std::invalid_argument("annealed_free_energy: h must be finite");
  if (n_max < 64 || n_max > ((std::size_t)1 << 20))
    throw std::invalid_argument(
        "annealed_free_energy: n_max must lie in [64, 2^20]");
  double fb = solve_free_energy(base, h, 1e-14);
  // contact law of the chain with the homogeneous growth peeled off; for
  // h > 0 the damping e^{-fb n} renormalizes it to a proper law
  double eh = std::exp(h);
  std::vector<double> ker(n_max + 1, 0.0), u(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n)
    ker[n] = eh * std::exp(-fb * (double)n) * base.k(n);
  u[0] = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n)
    u[n] = block_dot_rev(ker.data(), u.data(), n);
  MassFunctionTable vt = mass_function(with_horizon(disorder, n_max), n_max);
  std::vector<double> f = joint_first_passage(u, vt.values);
  // mass closure: sum f = 1 - 1/I for the undamped tilted chain, and the
  // damped chain (fb > 0) meets the disorder infinitely often, so 1/I = 0
  double inv = fb > 0.0
                   ? 0.0
                   : inverse_overlap(base, disorder, h, "annealed_free_energy");
  double eb = std::exp(beta);
  std::vector<double> kt(n_max + 1, 0.0);
  KahanSum table_mass;
  for (std::size_t n = 1; n <= n_max; ++n) {
    kt[n] = eb * f[n];
    table_mass.add(kt[n]);
  }
  double total = eb * (1.0 - inv);
  double tail_mass = total - table_mass.value();
  if (tail_mass < 0.0) {
    if (tail_mass < -1e-8 * total)
      throw std::logic_error(
          "annealed_free_energy: table mass exceeds the overlap identity");
    tail_mass = 0.0;
  }
  double s_full = fb > 0.0 ? 1.0 + std::min(disorder.exponent, 2.0)
                           : (h < 0.0 ? 1.0 + base.exponent +
                                            std::max(0.0, 1.0 - disorder.exponent)
                                      : (base.exponent + disorder.exponent > 1.0
                                             ? base.exponent + disorder.exponent
                                             : 2.0 - base.exponent -
                                                   disorder.exponent));
  double zt = tail_mass > 0.0 ? zeta_tail(s_full, (double)n_max) : 0.0;
  TabulatedLaw tab(std::move(kt), zt > 0.0 ? tail_mass / zt : 0.0, s_full);
  return fb + solve_free_energy(tab, 0.0, 1e-14);
}

ScalingFit annealed_nu_fit(const PowerLawRenewal& base,
                           const PowerLawRenewal& disorder, double beta,
                           double delta_lo, double delta_hi, int points,
                           std::size_t n_max) {
  require_law(base, "annealed_nu_fit", false);
  require_law(disorder, "annealed_nu_fit", false);
  if (!(delta_lo > 0.0) || !(delta_hi > delta_lo))
    throw std::invalid_argument("annealed_nu_fit: need 0 < delta_lo < delta_hi");
  if (points < 4 || points > 64)
    throw std::invalid_argument("annealed_nu_fit: points must be in [4, 64]");
  double h = annealed_critical_point(base, disorder, beta, 1e-9);
  ScalingFit out;
  out.abscissa.resize(points);
  out.response.resize(points);
  std::vector<double> lx(points), ly(points);
  for (int i = 0; i < points; ++i) {
    double delta =
        delta_lo * std::pow(delta_hi / delta_lo, (double)i / (points - 1));
    double fa = annealed_free_energy(base, disorder, beta, h + delta, n_max);
    if (!(fa > 0.0))
      throw std::runtime_error(
          "annealed_nu_fit: free energy vanished above the critical curve");
    out.abscissa[i] = delta;
    out.response[i] = fa;
    lx[i] = std::log(delta);
    ly[i] = std::log(fa);
  }
  LineFit fit = fit_line(lx, ly);
  out.exponent = fit.slope;
  out.exponent_err = fit.slope_err;
  out.amplitude = std::exp(fit.intercept);
  return out;
}

RelevanceReport large_beta_relevance_check(const PowerLawRenewal& base,
                                           const PowerLawRenewal& disorder) {
  require_law(base, "large_beta_relevance_check", false);
  require_law(disorder, "large_beta_relevance_check", false);
  if (!(disorder.exponent > 1.0))
    throw std::domain_error(
        "large_beta_relevance_check: needs a finite-mean disorder set");
  const std::size_t n_tab = 16384;
  MassFunctionTable vt = mass_function(with_horizon(disorder, n_tab), n_tab);
  double mu_inv = vt.mean_inverse;
  double s = 1.0 + base.exponent;
  KahanSum contact, weighted_log;
  for (std::size_t n = 1; n <= n_tab; ++n) {
    double kn = base.k(n);
    double un = vt.u(n);
    contact.add(kn * un);
    weighted_log.add(kn * un * std::log((double)n));
  }
  // beyond the table the contact density is flat to O(n^{1-alpha_hat});
  // the remaining sums close analytically
  double p = contact.value() +
             mu_inv * base.prefactor * zeta_tail(s, (double)n_tab);
  double lsum = weighted_log.value() +
                mu_inv * base.prefactor * zeta_tail_log(s, (double)n_tab);
  // -sum uhat K log K with K(n) = c n^{-s}
  double entropy = -std::log(base.prefactor) * p + s * lsum;
  RelevanceReport rep;
  rep.contact_cost = -std::log(p);
  rep.entropy_cost = entropy / p;
  rep.satisfied = rep.contact_cost > rep.entropy_cost;
  return rep;
}

} // namespace pinren
