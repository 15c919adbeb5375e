#pragma once

#include "pinren/renewal.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace pinren {

// Quenched layer: the chain sees one frozen realization of the disorder set
// and collects an extra reward beta at every contact that lands on it.  The
// partition function is an exact O(n^2) dynamic program per realization;
// free energies come from averaging (1/n) log Z over independent paths.

// Log-domain partition tables for one disorder realization.  logz[m] is the
// pinned value (chain forced to make a contact at m), logz[0] = 0 by
// convention.  logz_free closes the window with the kernel tail instead of a
// final contact.
struct LogPartitionTable {
  std::vector<double> logz;
  double logz_free = 0.0;
  double beta = 0.0;
  double h = 0.0;
};

// Pinned recursion Z(m) = sum_{j<m} Z(j) K(m-j) e^{h + beta*delta(m)},
// evaluated with a running-max log-sum-exp so large rewards cannot overflow.
// The law must carry no tilt; the contact reward enters only through h.
// Throws out_of_range when the disorder path does not cover [0, n].
LogPartitionTable quenched_partition_dp(const DisorderPath& disorder,
                                        const PowerLawRenewal& law, double beta,
                                        double h, std::size_t n);

// Monte Carlo free-energy estimate over independent disorder paths.  Errors
// are delete-one jackknife.  half_value repeats the estimate at window n/2 as
// a finite-size probe, and bias_corrected extrapolates the pair against the
// known correction exponent (contact count grows like n^exponent when the
// disorder mean diverges, like n/mu otherwise); near exponent one the
// extrapolation is ill-posed and bias_corrected falls back to value.
struct QuenchedMcEstimate {
  double value = 0.0;
  double se = 0.0;
  double half_value = 0.0;
  double half_se = 0.0;
  double bias_corrected = 0.0;
  double bias_corrected_se = 0.0;
  int replicas = 0;
};

QuenchedMcEstimate quenched_free_energy_mc(const PowerLawRenewal& law,
                                           const PowerLawRenewal& disorder_law,
                                           double beta, double h, std::size_t n,
                                           int replicas, std::uint64_t seed,
                                           int threads = 1,
                                           bool stationary_start = false);

// Exact disorder measure on windows small enough to enumerate: weight
// proportional to e^{theta * #contacts} times the product of gap weights,
// over the 2^(n-1) configurations pinned at n.  weights is indexed by a
// bitmask over the interior sites 1..n-1 (bit k-1 for site k); site n is
// always occupied and counted in the tilt.
struct TiltedDisorderMeasure {
  std::size_t window = 0;
  double theta = 0.0;
  std::vector<double> weights;
  double log_normalizer = 0.0; // log of the pinned partition sum

  // P(site occupied); sites 0 and n are deterministic.
  double marginal(std::size_t site) const;
};

TiltedDisorderMeasure tilted_disorder_enumerate(const PowerLawRenewal& disorder_law,
                                                std::size_t n, double theta);

// Same measure over caller-supplied positive gap weights (index = gap size,
// entry 0 unused).  This is the entry point for non-power-law probes.
TiltedDisorderMeasure tilted_disorder_enumerate(const std::vector<double>& gap_weights,
                                                std::size_t n, double theta);

// Exhaustive check that the conditional occupation probability of every
// interior site is nondecreasing in the rest of the configuration.  On
// violation, site is the 1-based offender and lower/upper are the two
// conditioning masks (bitwise lower <= upper) whose conditionals invert.
struct MonotonicityReport {
  bool monotone = true;
  std::size_t site = 0;
  unsigned lower = 0;
  unsigned upper = 0;
};

MonotonicityReport monotonicity_check(const TiltedDisorderMeasure& measure);

// Paired probe: free energy under theta-tilted disorder, estimated by
// self-normalized importance sampling from the plain disorder law with
// weight e^{theta * #contacts}, against the untilted chain with the reward
// shifted to h + c*beta*theta.  All columns share the same disorder paths,
// so diff_se (for tilted - base) benefits from the pairing.
struct TiltShiftReport {
  double tilted = 0.0;
  double tilted_se = 0.0;
  double base = 0.0;
  double base_se = 0.0;
  double diff_se = 0.0;
  std::array<double, 2> c_values{{0.1, 1.0}};
  std::array<double, 2> shifted{{0.0, 0.0}};
  std::array<double, 2> shifted_se{{0.0, 0.0}};
  int replicas = 0;
};

// Requires a disorder law with finite mean gap (exponent > 1): the shift
// c*beta*theta is calibrated against a positive contact density.
TiltShiftReport tilt_vs_shift_probe(const PowerLawRenewal& law,
                                    const PowerLawRenewal& disorder_law,
                                    double beta, double h, double theta,
                                    std::size_t n, int replicas,
                                    std::uint64_t seed, int threads = 1);

} // namespace pinren
