#pragma once

#include "pinren/renewal.hpp"
#include "pinren/util.hpp"

#include <utility>
#include <vector>

namespace pinren {

// Free energy of the homogeneous pinning model: F(h) is the unique x >= 0
// with sum_n K(n) e^{-nx} = e^{-h}, zero at and below the critical point
// h_crit = -log(total mass).

struct FreeEnergyCurve {
  std::vector<std::pair<double, double>> samples;            // (h, F)
  std::vector<std::pair<double, double>> derivative_samples; // (h, F')
};

double solve_free_energy(const PowerLawRenewal& law, double h, double tol);
double solve_free_energy(const TabulatedLaw& law, double h, double tol);

// Contact fraction F'(h) from the implicit-function identity
// F' = e^{-h} / sum_n n K(n) e^{-n F}; zero in the delocalized phase.
double free_energy_slope(const PowerLawRenewal& law, double h, double tol);

FreeEnergyCurve sample_free_energy(const PowerLawRenewal& law,
                                   const std::vector<double>& hs, double tol);

// Least-squares slope of log F against log h over samples with h in [lo, hi].
// Requires 0 < lo < hi <= 1 and at least 8 usable points.
LineFit critical_exponent_fit(const FreeEnergyCurve& curve, double lo, double hi);

struct ExpansionReport {
  double f;             // solved F(h)
  double linear;        // h / mu
  double correction;    // F(h) - h/mu
  double predicted;     // leading-order prediction for the correction
  double ratio;         // correction / predicted, 1 when both vanish
  bool log_corrected;   // true at the exponent where the prediction gains a log
};

// Compares F(h) - h/mu against its leading asymptotic term. Requires a
// recurrent law with exponent > 1 and h in [0, 0.05].
ExpansionReport free_energy_expansion_check(const PowerLawRenewal& law, double h);

// Relative entropy rate of the tilted gap measure,
// theta F'(theta) - F(theta), nonnegative by convexity.
double entropy_rate(const PowerLawRenewal& law, double theta);

} // namespace pinren
