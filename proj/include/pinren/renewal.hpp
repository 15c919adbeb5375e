#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pinren/special.hpp"
#include "pinren/util.hpp"

namespace pinren {

// Inter-arrival law K(n) = prefactor * e^{tilt} * n^{-(1+exponent)} on
// n >= 1, plus an atom at infinity of mass 1 - e^{tilt}.  tilt = 0 is the
// recurrent case; normalization is exact because prefactor defaults to
// 1/zeta(1+exponent) and the tail beyond any table is available in closed
// form.  The slowly varying factor is a genuine constant throughout, which
// keeps the law log-convex (the monotonicity machinery relies on that).
struct PowerLawRenewal {
  double exponent = 0.0;   // alpha (or alpha-hat for the disorder law)
  double prefactor = 0.0;  // c = 1/zeta(1+alpha) unless overridden
  double tilt = 0.0;       // h <= 0; defect mass 1 - e^h
  std::size_t horizon = 0; // tabulation / sampling cutoff

  double k(std::uint64_t n) const;  // K(n), valid for any n >= 1
  double defect() const;            // mass of the atom at infinity
  bool recurrent() const { return tilt == 0.0; }
  double tail_mass(double n) const; // sum_{m > n} K(m), analytic
  double mean_gap() const;          // mu; +inf for exponent <= 1; recurrent only
};

// One realization of a renewal set on [0, window]: sorted hit times plus
// O(1) indicator access.
struct DisorderPath {
  std::uint64_t window = 0;
  std::vector<std::uint64_t> hits; // strictly increasing
  std::vector<std::uint8_t> delta; // delta[m] = 1 iff m is hit; size window+1

  bool contains(std::uint64_t m) const { return delta[m] != 0; }
};

enum class MassRegime { infinite_mean, finite_mean, defective };

struct MassFunctionTable {
  std::vector<double> values; // u(0..n_max)
  double mean_inverse = 0.0;  // 1/mu, 0 when mu = infinity or law defective
  MassRegime regime = MassRegime::infinite_mean;

  double u(std::size_t n) const { return values[n]; }
};

// Delay distribution P(tau_1 > n)/mu of the stationary version.
struct StationaryDelay {
  std::vector<double> weights; // n = 0..horizon
  double tail_weight = 0.0;    // mass beyond the table
  double exponent = 0.0;       // alpha-hat, for tail inversion
  double mu = 0.0;
};

PowerLawRenewal normalize_power_law(double exponent, std::size_t horizon);

// K_h(n) = e^h K(n); tilts compose.  h > 0 is rejected: localized tilts
// enter through the free-energy solver, never through a law object.
PowerLawRenewal tilt_law(const PowerLawRenewal& law, double h);

// u(n) = 1{n=0} + sum_{j=1}^{n} K(j) u(n-j), exact O(n_max^2) recursion.
MassFunctionTable mass_function(const PowerLawRenewal& law, std::size_t n_max);

// Inverse-CDF gap sampler over the tabulated law, continuous Pareto
// inversion (rounded up) beyond the horizon.  Ties break on half-open
// intervals [cum(n-1), cum(n)).
class GapSampler {
public:
  explicit GapSampler(const PowerLawRenewal& law);
  std::uint64_t sample(Rng& rng) const;

private:
  std::vector<double> cum_; // cum_[n] = K(1)+...+K(n)
  double alpha_;
  double horizon_;
};

DisorderPath sample_path(const PowerLawRenewal& law, std::uint64_t window,
                         std::uint64_t seed);

// Same path construction from caller-owned sampler and stream; first_hit
// places tau_0 (nonzero for delayed/stationary starts).
DisorderPath sample_path_with(const GapSampler& sampler, std::uint64_t window,
                              Rng& rng, std::uint64_t first_hit = 0);

StationaryDelay stationary_delay(const PowerLawRenewal& law);
std::uint64_t sample_delay(const StationaryDelay& delay, Rng& rng);

// (1/mu)(u(lag) - 1/mu); table must cover lag.
double covariance_decay(const PowerLawRenewal& law,
                        const MassFunctionTable& table, std::size_t lag);
double covariance_decay(const PowerLawRenewal& law, std::size_t lag);

// sum_k k^{-lambda} f(x k) for the three probe shapes, paired with the
// predicted leading-order form it should follow as x -> 0.
enum class SeriesVariant { one_minus_exp, exp_minus_one_plus, plain_exp };

struct SeriesAsymptotics {
  double value = 0.0;
  double predicted = 0.0;
};

SeriesAsymptotics series_asymptotics(double lambda, SeriesVariant variant,
                                     double x);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Monte Carlo E[tau_k^{-r}] with naive stderr of the sample mean.
McEstimate negative_moment_tau_k(const PowerLawRenewal& law, std::uint64_t k,
                                 double r, std::size_t samples,
                                 std::uint64_t seed);

// Generic tabulated inter-arrival law with an optional fitted power tail
// K(n) ~ amplitude * n^{-tail_exponent} beyond the table.  Used for the
// intersection renewal and for closed-form solver cross-checks.
class TabulatedLaw {
public:
  // weights[0] is ignored (no mass at 0); weights[n] = K(n)
  explicit TabulatedLaw(std::vector<double> weights, double tail_amplitude = 0.0,
                        double tail_exponent = 0.0);

  double k(std::uint64_t n) const;
  std::size_t table_size() const { return k_.size() - 1; } // largest tabulated n
  double mass() const { return mass_; }
  double tail_amplitude() const { return amp_; }
  double tail_exponent() const { return s_; }

  // sum_n K(n) e^{-nx}, x >= 0; the continuation tail is evaluated through
  // the polylog so small x stays accurate inside root finders.
  double laplace(double x) const;

private:
  std::vector<double> k_;
  double amp_ = 0.0;
  double s_ = 0.0;
  double mass_ = 0.0;
  std::optional<PolylogExp> li_;
};

// S(x) = sum_n K(n) e^{-nx} for the exact power law; li must be
// PolylogExp(1 + law.exponent).  Machine-accurate on x in [0, ~3.5],
// direct summation beyond.
double laplace_transform(const PowerLawRenewal& law, const PolylogExp& li,
                         double x);

} // namespace pinren
