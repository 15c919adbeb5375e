#pragma once

#include "pinren/renewal.hpp"

#include <cstddef>
#include <vector>

namespace pinren {

// Annealed layer.  Everything here is organized around the overlap sum
//
//   I(h) = sum_{k>=0} e^{hk} P(tau_k in hat-tau),   h < 0,
//
// the expected tilted number of simultaneous renewals of the chain and the
// disorder set.  The annealed critical curve solves I(h) = 1/(1 - e^{-beta});
// the onset beta0 = -log(1 - 1/I(0)) is positive exactly when I(0) converges.
//
// I(h) is evaluated in the frequency domain.  Writing u_h for the renewal
// mass of the e^h-tilted chain and u-hat for the disorder, Parseval gives
//
//   I(h) = (1/pi) \int_0^pi Re[ (1 - phihat)^{-1} conj(1 - e^h phi)^{-1} ] dt
//
// when the disorder mean diverges, and a mean-subtracted variant otherwise
// (intersection_sum_excess below).  A direct n-space sum is useless here: the
// tilted mass spreads out to n ~ |h|^{-1/alpha}, so the scaling fits near the
// critical curve would need astronomically long tables, while the integrand
// only develops structure near t ~ defect^{1/alpha} and a dyadic quadrature
// mesh reaches that for any representable h.

// Convergence class of the overlap sum at h = 0.  The exponent test decides:
// finite exactly when alpha + alpha-hat < 1.  Within 1e-9 of the boundary the
// sum is declared unclassifiable rather than guessed.
enum class OverlapClass { finite, divergent, boundary };

struct OverlapValue {
  OverlapClass cls = OverlapClass::divergent;
  double value = 0.0; // meaningful only when cls == finite
};

// I(h) for h < 0 with certified relative tolerance (quadrature octaves are
// descended until the measured geometric tail closes below it).  Both laws
// must be recurrent; the tilt enters only through h.  Throws std::domain_error
// for h >= 0 and std::runtime_error when the tail cannot be certified, which
// genuinely happens for disorder exponents within a few percent of 1 (the
// integrand then decays like t^{-|1-alpha_hat|} and no practical octave count
// closes it).  rel_tol below 1e-11 is refused: the per-octave quadrature
// error floor sits around there.
double intersection_sum(const PowerLawRenewal& base,
                        const PowerLawRenewal& disorder, double h,
                        double rel_tol = 1e-10);

// J(h) = sum_n u_h(n) (uhat(n) - 1/mu-hat), the part of I(h) left after
// removing the flat contact density of a finite-mean disorder set; requires
// disorder exponent > 1.  This is the quantity whose small-|h| power law
// drives the correction to the Jensen line, so it is exposed rather than
// reconstructed by subtraction (which would cancel catastrophically when
// I ~ 1/(mu-hat defect) dominates).
double intersection_sum_excess(const PowerLawRenewal& base,
                               const PowerLawRenewal& disorder, double h,
                               double rel_tol = 1e-10);

// Limit h -> 0-.  The class comes from the exponent test alone; the value is
// evaluated only in the finite case.
OverlapValue intersection_sum_at_zero(const PowerLawRenewal& base,
                                      const PowerLawRenewal& disorder,
                                      double rel_tol = 1e-10);

// p = 1 - 1/I, the return probability of the joint renewal process.  Accepts
// +infinity (p = 1); throws std::domain_error below 1, which no renewal pair
// can produce.
double return_probability(double overlap);

// beta0 = -log(1 - 1/I(0)); zero when the overlap sum diverges.  Near the
// classification boundary the ambiguity propagates as std::domain_error.
double beta_zero(const PowerLawRenewal& base, const PowerLawRenewal& disorder,
                 double rel_tol = 1e-10);

// h_c^a(beta) <= 0: the root of I(h) = 1/(1 - e^{-beta}), zero for
// beta <= beta0.  Bisection runs in log(-h) between 1e-16 and 35, so betas
// beyond ~30 are refused (I - 1 underflows double precision there) and a root
// hugging zero closer than 1e-16 reports failure instead of returning junk.
double annealed_critical_point(const PowerLawRenewal& base,
                               const PowerLawRenewal& disorder, double beta,
                               double rel_tol = 1e-8);

// Log-log power fit produced by the scaling probes below.
struct ScalingFit {
  double exponent = 0.0;     // fitted slope
  double exponent_err = 0.0; // OLS standard error of the slope
  double amplitude = 0.0;    // e^{intercept}
  std::vector<double> abscissa;
  std::vector<double> response;
};

// Gap exponent gamma of the annealed curve, fitted over the scaling window
// [lo, hi] of the natural variable: beta itself when beta0 = 0, beta - beta0
// past a positive onset.  The response is -h_c^a, except for finite-mean
// disorder where it is the gap -h_c^a - beta/mu-hat above the Jensen line.
// Marginal tuples whose power law carries a logarithmic correction
// (alpha-hat = 1, alpha = 1, alpha-hat = 1 + min(alpha,1), and
// 2 alpha + alpha-hat = 1 on the delayed-onset side) are refused with
// std::domain_error: fitting a clean power there would report a lie.
ScalingFit annealed_gamma_fit(const PowerLawRenewal& base,
                              const PowerLawRenewal& disorder, double lo,
                              double hi, int points = 9);

// Free-energy exponent above the critical curve at fixed beta:
// F^a(beta, h_c^a + delta) ~ delta^{1/alpha_eff} fitted over delta in
// [delta_lo, delta_hi].
ScalingFit annealed_nu_fit(const PowerLawRenewal& base,
                           const PowerLawRenewal& disorder, double beta,
                           double delta_lo, double delta_hi, int points = 9,
                           std::size_t n_max = 8192);

// The critical curve on a user grid.  Points are independent, so the sweep
// parallelizes; the partition never touches shared mutable state and results
// are byte-identical for any thread count.
struct AnnealedCurve {
  std::vector<double> beta_grid;
  std::vector<double> hca;
  double beta0 = 0.0;
  ScalingFit gamma_ann_fit; // filled by the driver when a fit is requested
  ScalingFit nu_a_fit;
};

AnnealedCurve compute_annealed_curve(const PowerLawRenewal& base,
                                     const PowerLawRenewal& disorder,
                                     const std::vector<double>& beta_grid,
                                     int threads, double rel_tol = 1e-8);

// Inter-arrival law of the joint renewal process (the intersection of the
// tilted chain with the disorder set), with e^beta per joint landing:
//
//   Ktilde(n) = e^beta [ w(n) - sum_{m<n} Ktilde(m) e^{-beta} w(n-m) ],
//   w(n) = u_h(n) uhat(n).
//
// first_passage[n] holds Ktilde(n) on 1..n_max; beyond the table the law
// continues as tail_amplitude * n^{-tail_exponent}, with the amplitude chosen
// so the total mass matches the overlap identity sum Ktilde = e^beta (1 - 1/I)
// exactly; raw truncation would miss O(n_max^{-alpha_eff}) of mass, far too
// much for calibration checks.  At h = h_c^a(beta) the law is a probability
// law (total_mass = 1); below it is defective.
struct IntersectionLaw {
  PowerLawRenewal base;     // the h-tilted chain law
  PowerLawRenewal disorder; // recurrent
  double beta_tilt = 0.0;
  std::vector<double> first_passage; // [0] unused
  double tail_amplitude = 0.0;
  double tail_exponent = 0.0; // full power, K(n) ~ A n^{-s}
  double total_mass = 0.0;
};

IntersectionLaw build_intersection_law(const PowerLawRenewal& tilted_base,
                                       const PowerLawRenewal& disorder,
                                       double beta, std::size_t n_max = 4096);

// F^a(beta, h): growth rate of the annealed pair partition function.  The
// homogeneous free energy F_b of the chain is pulled out first; what remains
// is the joint-return law of the exponentially damped chain with the
// disorder, whose own localization rate y solves
// sum e^beta f*(n) e^{-yn} = 1.  Total: F_b + y.  Zero at and below the
// critical curve.
double annealed_free_energy(const PowerLawRenewal& base,
                            const PowerLawRenewal& disorder, double beta,
                            double h, std::size_t n_max = 8192);

// Large-beta energy/entropy comparison for finite-mean disorder: localizing
// on the disorder set costs -log P(tau_1 in hat-tau) per contact and buys the
// conditional gap entropy -(1/P) sum uhat(n) K(n) log K(n).  satisfied means
// the cost exceeds the entropy, i.e. the strong-coupling bound is strict.
// Throws std::domain_error when the disorder mean diverges.
struct RelevanceReport {
  double contact_cost = 0.0;
  double entropy_cost = 0.0;
  bool satisfied = false;
};

RelevanceReport large_beta_relevance_check(const PowerLawRenewal& base,
                                           const PowerLawRenewal& disorder);

} // namespace pinren
