#pragma once

#include "pinren/renewal.hpp"
#include "pinren/special.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace pinren {

// Characteristic function of a recurrent power-law renewal tilted by
// theta >= 0 into the localized probability law
//   K_theta(n) = e^{theta - F(theta) n} K(n),
// F(theta) the homopolymer free energy (0 at theta = 0).  one_minus keeps
// every term proportional to t, so 1 - phi stays relatively accurate down
// to t -> 0 where both the real part (order t^{2 and alpha}) and the
// imaginary part (order t) would otherwise drown in roundoff.
class CharacteristicFunction {
public:
  CharacteristicFunction(const PowerLawRenewal& law, double theta);

  std::complex<double> one_minus(double t) const;
  std::complex<double> value(double t) const { return 1.0 - one_minus(t); }

  double mean() const { return mean_; }      // E_theta(tau_1)
  double tilt_rate() const { return f_hat_; } // F(theta)
  double theta() const { return theta_; }

private:
  PowerLawRenewal law_;
  double theta_ = 0;
  double f_hat_ = 0;
  double mean_ = 0;
  const PolylogExp* li_ = nullptr; // order 1 + exponent
};

// Fourier inversion of the mass function,
//   P_theta(n in tau) = 1/E_theta(tau_1) + (1/pi) int_0^pi cos(nt) R(t) dt,
// R(t) = 2 Re[(1 - phi_theta(t))^{-1}], on a Gauss-Legendre mesh refined
// dyadically toward the t = 0 singularity and bounded-width outward so
// cos(nt) stays resolved up to n_max.  quadrature_points is a node budget;
// the mesh is coarsened to fit it if needed.  The integrand R(t) is
// evaluated once per node at construction.
class SpectralInverter {
public:
  SpectralInverter(const PowerLawRenewal& law, double theta, std::size_t n_max,
                   std::size_t quadrature_points);

  // P_theta(n in tau); n = 0 returns 1 by definition.
  double mass(std::size_t n) const;

  double mean() const { return mean_; }
  std::size_t nodes() const { return t_.size(); }

private:
  double mean_ = 0;
  std::vector<double> t_, wr_; // node position, GL weight times R(t)
};

double mass_by_inversion(const PowerLawRenewal& law, double theta,
                         std::size_t n, std::size_t quadrature_points);

struct PositivityReport {
  double min_mass = 0;
  bool positive = false;
  double theta_at_min = 0;
  std::size_t n_at_min = 0;
};

// Minimum of P_theta(n in tau) over the tilt grid and 1 <= n <= n_max,
// computed from the convolution recursion of each tilted law.
PositivityReport uniform_positivity_probe(const PowerLawRenewal& law,
                                          const std::vector<double>& theta_grid,
                                          std::size_t n_max);

struct CfEstimateReport {
  double im_constant = 0; // smallest c with t/c <= |Im(1-phi)| <= c t on grid
  double re_constant = 0; // smallest c with Re(1-phi) <= c t^{2^alpha} (log-corrected at 2)
  double im_slope = 0;    // log-log slope of |Im(1-phi)| in t, smallest theta
  double re_slope = 0;    // same for Re(1-phi)
  bool re_nonneg = false;
  bool im_two_sided = false;
};

// Grid verification of the two-sided linear bound on Im(1-phi_theta) and
// the t^{2 and alpha} upper bound on Re(1-phi_theta), uniformly over the
// tilt grid.  Slopes are fitted on the smallest tilt in the grid; larger
// tilts regularize the small-t behavior and would bias the exponent.
CfEstimateReport cf_estimate_probe(const PowerLawRenewal& law,
                                   const std::vector<double>& theta_grid,
                                   const std::vector<double>& t_grid);

} // namespace pinren
