#pragma once

#include <complex>
#include <vector>

// Scalar special functions used by the renewal machinery: Riemann zeta on the
// real line, Euler-Maclaurin tail sums for power series, and the expansion of
// Li_s(e^mu) around mu = 0.  Everything here is self-contained; accuracy is
// close to machine precision away from the integer poles of the polylog.

namespace pinren {

// sin(pi*x) with exact zeros at integer x (plain std::sin(pi*x) loses the
// zeros for large |x|, which matters in the zeta functional equation).
double sin_pi(double x);

// Riemann zeta on the real line, s != 1.  Euler-Maclaurin for s > 0, the
// functional equation below 0.  Relative accuracy ~1e-14 over the range used
// here (|s| <= ~150).
double riemann_zeta(double s);

// sum_{n > nmin} n^{-s} for s > 1 (nmin need not be integral).
double zeta_tail(double s, double nmin);

// sum_{n > nmin} n^{-s} * ln(n) for s > 1.
double zeta_tail_log(double s, double nmin);

class PolylogExp;

// Process-wide cache of PolylogExp instances keyed on the exact bits of s.
// Construction costs ~160 zeta evaluations, so solvers that sit in fit loops
// go through here.  Thread safe; returned references live forever.
const PolylogExp& shared_polylog(double s);

// Li_s(e^mu) for |mu| < 2*pi via the expansion in powers of mu.  The zeta
// coefficients are cached at construction, so repeated evaluations (the hot
// path in the transform code) cost only the series loop.
//
// Values of s within 1e-7 of an integer <= 1 are rejected; integers s >= 2
// take the logarithmic branch.  Near-integer non-integer s loses roughly the
// digits of 1/dist(s, Z), so keep exponents away from integers unless they
// are exact.
class PolylogExp {
public:
  explicit PolylogExp(double s);

  // Li_s(e^mu).  Re(mu) <= 0 in all uses here; the branch of log(-mu) is the
  // principal one.
  std::complex<double> value(std::complex<double> mu) const;

  // Li_s(e^mu) - zeta(s).  Lets callers cancel the mu = 0 constant exactly
  // instead of numerically (the difference vanishes like mu^{min(s-1,1)}).
  std::complex<double> value_minus_const(std::complex<double> mu) const;

  // Li_s(e^{mu0}) - Li_s(e^{mu0 + it}) for real mu0 < 0, assembled term by
  // term so every piece carries an explicit factor of t.  Subtracting two
  // value() calls loses all significant digits of the real part once
  // |t| << |mu0|; this keeps relative accuracy ~1e-13 down to t -> 0.
  std::complex<double> value_diff(double mu0, double t) const;

  // Li_s(e^mu) - zeta(s) - zeta(s-1) mu, i.e. the expansion with both the
  // constant and the linear coefficient removed symbolically.  Needed where
  // the linear part cancels against an exact mean elsewhere and forming the
  // difference numerically would wipe out the remainder.
  std::complex<double> value_minus_const_sublinear(std::complex<double> mu) const;

  double s() const { return s_; }
  double zeta_at_s() const { return zeta_coeff_[0]; }

private:
  std::complex<double> tail_term(std::complex<double> mu) const;

  double s_ = 0;
  bool integer_branch_ = false;
  int s_int_ = 0;
  double gamma_one_minus_s_ = 0; // Gamma(1-s), non-integer branch only
  double harmonic_ = 0;          // H_{s-1}, integer branch only
  std::vector<double> zeta_coeff_; // zeta(s-k)/k!, slot s-1 unused when integer
};

} // namespace pinren
