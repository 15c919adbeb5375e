#include "pinren/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pinren {

double PowerLawRenewal::k(std::uint64_t n) const {
  return prefactor * std::exp(tilt) * std::pow((double)n, -(1.0 + exponent));
}

double PowerLawRenewal::defect() const { return -std::expm1(tilt); }

double PowerLawRenewal::tail_mass(double n) const {
  return prefactor * std::exp(tilt) * zeta_tail(1.0 + exponent, n);
}

double PowerLawRenewal::mean_gap() const {
  if (!recurrent())
    throw std::domain_error("mean_gap: defective law has an infinite mean");
  if (exponent <= 1.0) return std::numeric_limits<double>::infinity();
  return prefactor * riemann_zeta(exponent);
}

PowerLawRenewal normalize_power_law(double exponent, std::size_t horizon) {
  if (exponent <= 0.0)
    throw std::domain_error("normalize_power_law: exponent must be positive");
  if (horizon < 2)
    throw std::invalid_argument("normalize_power_law: horizon must be >= 2");
  PowerLawRenewal law;
  law.exponent = exponent;
  law.prefactor = 1.0 / riemann_zeta(1.0 + exponent);
  law.tilt = 0.0;
  law.horizon = horizon;
  return law;
}

PowerLawRenewal tilt_law(const PowerLawRenewal& law, double h) {
  if (h > 0.0)
    throw std::domain_error("tilt_law: positive tilt goes through the free-energy solver");
  PowerLawRenewal out = law;
  out.tilt += h;
  return out;
}

MassFunctionTable mass_function(const PowerLawRenewal& law, std::size_t n_max) {
  if (n_max > law.horizon)
    throw std::out_of_range("mass_function: n_max exceeds the law horizon");
  std::vector<double> kv(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) kv[n] = law.k(n);
  MassFunctionTable t;
  t.values.assign(n_max + 1, 0.0);
  t.values[0] = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n)
    t.values[n] = block_dot_rev(kv.data(), t.values.data(), n);
  if (!law.recurrent()) {
    t.regime = MassRegime::defective;
  } else if (law.exponent > 1.0) {
    t.regime = MassRegime::finite_mean;
    t.mean_inverse = 1.0 / law.mean_gap();
  } else {
    t.regime = MassRegime::infinite_mean;
  }
  return t;
}

GapSampler::GapSampler(const PowerLawRenewal& law)
    : alpha_(law.exponent), horizon_((double)law.horizon) {
  if (!law.recurrent())
    throw std::domain_error("GapSampler: law must be recurrent");
  cum_.assign(law.horizon + 1, 0.0);
  KahanSum acc;
  for (std::size_t n = 1; n <= law.horizon; ++n) {
    acc.add(law.k(n));
    cum_[n] = acc.value();
  }
}

std::uint64_t GapSampler::sample(Rng& rng) const {
  double u = rng.uniform();
  double top = cum_.back();
  if (u < top) {
    auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), u);
    return (std::uint64_t)(it - cum_.begin());
  }
  // continuous Pareto inversion of the analytic tail, rounded up; the
  // rounding bias only touches samples beyond the horizon
  double v = (u - top) / (1.0 - top);
  double one_minus = 1.0 - v;
  if (one_minus < 1e-12) one_minus = 1e-12;
  double x = horizon_ * std::pow(one_minus, -1.0 / alpha_);
  if (!(x < 4.6e18)) x = 4.6e18;
  return (std::uint64_t)std::floor(x) + 1;
}

DisorderPath sample_path_with(const GapSampler& sampler, std::uint64_t window,
                              Rng& rng, std::uint64_t first_hit) {
  DisorderPath p;
  p.window = window;
  p.delta.assign(window + 1, 0);
  std::uint64_t t = first_hit;
  while (t <= window) {
    p.hits.push_back(t);
    p.delta[t] = 1;
    std::uint64_t g = sampler.sample(rng);
    if (g > window - t) break; // next hit falls outside the window
    t += g;
  }
  return p;
}

DisorderPath sample_path(const PowerLawRenewal& law, std::uint64_t window,
                         std::uint64_t seed) {
  GapSampler s(law);
  Rng rng(seed);
  return sample_path_with(s, window, rng, 0);
}

StationaryDelay stationary_delay(const PowerLawRenewal& law) {
  if (law.exponent <= 1.0 || !law.recurrent())
    throw std::domain_error("stationary_delay: requires a finite mean");
  StationaryDelay d;
  d.exponent = law.exponent;
  d.mu = law.mean_gap();
  d.weights.assign(law.horizon + 1, 0.0);
  d.weights[0] = 1.0 / d.mu;
  for (std::size_t n = 1; n <= law.horizon; ++n)
    d.weights[n] = law.tail_mass((double)n) / d.mu;
  // sum_{n>N} P(tau > n) = sum_{m>N+1} (m - 1 - N) K(m), in closed form
  double N = (double)law.horizon;
  double a = law.exponent;
  double beyond = law.prefactor *
                  (zeta_tail(a, N + 1.0) - (N + 1.0) * zeta_tail(1.0 + a, N + 1.0));
  d.tail_weight = std::max(0.0, beyond / d.mu);
  return d;
}

std::uint64_t sample_delay(const StationaryDelay& delay, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t n = 0; n < delay.weights.size(); ++n) {
    acc += delay.weights[n];
    if (u < acc) return n;
  }
  double v = (u - acc) / std::max(delay.tail_weight, 1e-300);
  if (v > 1.0) v = 1.0;
  double one_minus = std::max(1.0 - v, 1e-12);
  double N = (double)(delay.weights.size() - 1);
  double x = N * std::pow(one_minus, 1.0 / (1.0 - delay.exponent));
  if (!(x < 4.6e18)) x = 4.6e18;
  return (std::uint64_t)std::floor(x) + 1;
}

double covariance_decay(const PowerLawRenewal& law,
                        const MassFunctionTable& table, std::size_t lag) {
  if (law.exponent <= 1.0 || !law.recurrent())
    throw std::domain_error("covariance_decay: requires a finite mean");
  if (lag >= table.values.size())
    throw std::out_of_range("covariance_decay: lag beyond the table");
  double mi = table.mean_inverse;
  return mi * (table.values[lag] - mi);
}

double covariance_decay(const PowerLawRenewal& law, std::size_t lag) {
  return covariance_decay(law, mass_function(law, lag), lag);
}

SeriesAsymptotics series_asymptotics(double lambda, SeriesVariant variant,
                                     double x) {
  if (lambda <= 0.0)
    throw std::domain_error("series_asymptotics: lambda must be positive");
  if (!(x > 0.0) || x > 0.1)
    throw std::domain_error("series_asymptotics: x must lie in (0, 0.1]");
  SeriesAsymptotics out;
  double lx = std::log(x);
  switch (variant) {
    case SeriesVariant::one_minus_exp: {
      // sum k^{-lambda} (1 - e^{-xk}) = zeta(lambda) - Li_lambda(e^{-x})
      if (lambda <= 1.0 + 1e-7)
        throw std::domain_error("series_asymptotics: one_minus_exp diverges for lambda <= 1");
      PolylogExp li(lambda);
      out.value = -li.value_minus_const({-x, 0.0}).real();
      if (std::fabs(lambda - 2.0) < 1e-9)
        out.predicted = x * (-lx);
      else if (lambda > 2.0)
        out.predicted = x * riemann_zeta(lambda - 1.0);
      else
        out.predicted = -std::tgamma(1.0 - lambda) * std::pow(x, lambda - 1.0);
      break;
    }
    case SeriesVariant::exp_minus_one_plus: {
      // sum k^{-lambda} (e^{-xk} - 1 + xk)
      if (lambda <= 2.0 + 1e-7)
        throw std::domain_error("series_asymptotics: exp_minus_one_plus diverges for lambda <= 2");
      PolylogExp li(lambda);
      out.value = li.value_minus_const({-x, 0.0}).real() + x * riemann_zeta(lambda - 1.0);
      if (std::fabs(lambda - 3.0) < 1e-9)
        out.predicted = 0.5 * x * x * (-lx);
      else if (lambda > 3.0)
        out.predicted = 0.5 * x * x * riemann_zeta(lambda - 2.0);
      else
        out.predicted = std::tgamma(1.0 - lambda) * std::pow(x, lambda - 1.0);
      break;
    }
    case SeriesVariant::plain_exp: {
      if (std::fabs(lambda - 1.0) < 1e-9) {
        out.value = -std::log(-std::expm1(-x));
        out.predicted = -lx;
      } else {
        PolylogExp li(lambda);
        out.value = li.value({-x, 0.0}).real();
        out.predicted = lambda < 1.0
                            ? std::tgamma(1.0 - lambda) * std::pow(x, lambda - 1.0)
                            : riemann_zeta(lambda);
      }
      break;
    }
  }
  return out;
}

McEstimate negative_moment_tau_k(const PowerLawRenewal& law, std::uint64_t k,
                                 double r, std::size_t samples,
                                 std::uint64_t seed) {
  if (samples < 100)
    throw std::invalid_argument("negative_moment_tau_k: need at least 100 samples");
  if (k < 1 || r <= 0.0)
    throw std::invalid_argument("negative_moment_tau_k: need k >= 1 and r > 0");
  GapSampler s(law);
  Rng rng(seed);
  KahanSum w, w2;
  for (std::size_t i = 0; i < samples; ++i) {
    double tau = 0.0;
    for (std::uint64_t j = 0; j < k; ++j) tau += (double)s.sample(rng);
    double v = std::pow(tau, -r);
    w.add(v);
    w2.add(v * v);
  }
  double n = (double)samples;
  McEstimate e;
  e.mean = w.value() / n;
  double var = (w2.value() - n * e.mean * e.mean) / (n - 1.0);
  e.se = std::sqrt(std::max(var, 0.0) / n);
  return e;
}

TabulatedLaw::TabulatedLaw(std::vector<double> weights, double tail_amplitude,
                           double tail_exponent)
    : k_(std::move(weights)), amp_(tail_amplitude), s_(tail_exponent) {
  if (k_.size() < 2)
    throw std::invalid_argument("TabulatedLaw: need weights up to n >= 1");
  k_[0] = 0.0;
  KahanSum m;
  for (std::size_t n = 1; n < k_.size(); ++n) {
    if (k_[n] < 0.0) throw std::invalid_argument("TabulatedLaw: negative weight");
    m.add(k_[n]);
  }
  if (amp_ > 0.0) {
    if (s_ <= 1.0 + 1e-9)
      throw std::invalid_argument("TabulatedLaw: tail exponent must exceed 1");
    // keep the polylog away from its integer dead zone; a 2e-7 nudge is
    // far below the accuracy of any fitted tail
    double rr = std::round(s_);
    if (std::fabs(s_ - rr) < 1e-7 && std::fabs(s_ - rr) > 0.0)
      s_ = rr + (s_ >= rr ? 2.2e-7 : -2.2e-7);
    li_.emplace(s_);
    m.add(amp_ * zeta_tail(s_, (double)table_size()));
  } else {
    amp_ = 0.0;
  }
  mass_ = m.value();
}

double TabulatedLaw::k(std::uint64_t n) const {
  if (n == 0) return 0.0;
  if (n < k_.size()) return k_[n];
  return amp_ == 0.0 ? 0.0 : amp_ * std::pow((double)n, -s_);
}

double TabulatedLaw::laplace(double x) const {
  if (x < 0.0) throw std::domain_error("TabulatedLaw::laplace: x must be >= 0");
  if (x == 0.0) return mass_;
  const std::size_t N = table_size();
  if (x > 3.5) {
    KahanSum acc;
    for (std::uint64_t n = 1;; ++n) {
      double term = k(n) * std::exp(-(double)n * x);
      acc.add(term);
      if (n >= N && term < 1e-18 * (acc.value() + 1e-300)) break;
      if (n > N + 64) break;
    }
    return acc.value();
  }
  KahanSum table_part, cont_part;
  double rstep = std::exp(-x);
  double p = rstep;
  for (std::size_t n = 1; n <= N; ++n) {
    if ((n & 511u) == 0) p = std::exp(-(double)n * x); // kill drift
    table_part.add(k_[n] * p);
    if (amp_ > 0.0) cont_part.add(std::pow((double)n, -s_) * p);
    p *= rstep;
  }
  double out = table_part.value();
  if (amp_ > 0.0) {
    double tail = li_->value({-x, 0.0}).real() - cont_part.value();
    out += amp_ * std::max(tail, 0.0);
  }
  return out;
}

double laplace_transform(const PowerLawRenewal& law, const PolylogExp& li,
                         double x) {
  if (x < 0.0) throw std::domain_error("laplace_transform: x must be >= 0");
  if (std::fabs(li.s() - (1.0 + law.exponent)) > 1e-12)
    throw std::invalid_argument("laplace_transform: polylog order mismatch");
  double w = std::exp(law.tilt);
  if (x == 0.0) return w;
  if (x > 3.5) {
    KahanSum acc;
    for (std::uint64_t n = 1; n <= 64; ++n) {
      double term = law.k(n) * std::exp(-(double)n * x);
      acc.add(term);
      if (term < 1e-18 * (acc.value() + 1e-300)) break;
    }
    return acc.value();
  }
  return w * law.prefactor * li.value({-x, 0.0}).real();
}

} // namespace pinren
