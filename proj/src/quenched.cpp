#include "pinren/quenched.hpp"

#include "pinren/util.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>

namespace pinren {

namespace {

void require_plain_law(const PowerLawRenewal& law, const char* who) {
  if (!(law.exponent > 0.0) || !std::isfinite(law.exponent))
    throw std::invalid_argument(std::string(who) +
                                ": gap exponent must be positive and finite");
  if (!law.recurrent())
    throw std::invalid_argument(std::string(who) +
                                ": law must carry no tilt, rewards are separate inputs");
}

void require_coupling(double beta, double h, const char* who) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument(std::string(who) + ": beta must be finite and >= 0");
  if (!std::isfinite(h))
    throw std::invalid_argument(std::string(who) + ": h must be finite");
}

// Mean and delete-one jackknife error of a replica vector.
struct ReplicaStats {
  double mean = 0.0;
  double se = 0.0;
};

ReplicaStats jackknife(const std::vector<double>& x) {
  const std::size_t r = x.size();
  KahanSum total;
  for (double v : x) total.add(v);
  ReplicaStats out;
  out.mean = total.value() / static_cast<double>(r);
  if (r < 2) return out;
  KahanSum spread;
  for (double v : x) {
    const double loo = (total.value() - v) / static_cast<double>(r - 1);
    const double d = loo - out.mean;
    spread.add(d * d);
  }
  out.se = std::sqrt(spread.value() * static_cast<double>(r - 1) /
                     static_cast<double>(r));
  return out;
}

// Jackknife error from a vector of delete-one pseudo-statistics.
double pseudo_se(const std::vector<double>& loo) {
  const std::size_t r = loo.size();
  if (r < 2) return 0.0;
  KahanSum total;
  for (double v : loo) total.add(v);
  const double mean = total.value() / static_cast<double>(r);
  KahanSum spread;
  for (double v : loo) {
    const double d = v - mean;
    spread.add(d * d);
  }
  return std::sqrt(spread.value() * static_cast<double>(r - 1) /
                   static_cast<double>(r));
}

// Jackknife error of the self-normalized ratio sum(u x)/sum(u).
double jackknife_ratio_se(const std::vector<double>& u,
                          const std::vector<double>& x) {
  const std::size_t r = u.size();
  if (r < 2) return 0.0;
  KahanSum num_all, den_all;
  for (std::size_t i = 0; i < r; ++i) {
    num_all.add(u[i] * x[i]);
    den_all.add(u[i]);
  }
  std::vector<double> loo(r);
  for (std::size_t i = 0; i < r; ++i)
    loo[i] = (num_all.value() - u[i] * x[i]) / (den_all.value() - u[i]);
  return pseudo_se(loo);
}

} // namespace

LogPartitionTable quenched_partition_dp(const DisorderPath& disorder,
                                        const PowerLawRenewal& law, double beta,
                                        double h, std::size_t n) {
  require_plain_law(law, "quenched_partition_dp");
  require_coupling(beta, h, "quenched_partition_dp");
  if (n == 0)
    throw std::invalid_argument("quenched_partition_dp: window must be positive");
  if (disorder.window < n || disorder.delta.size() < n + 1)
    throw std::out_of_range(
        "quenched_partition_dp: disorder path does not cover the window");

  std::vector<double> lk(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) lk[m] = std::log(law.k(m));

  LogPartitionTable out;
  out.beta = beta;
  out.h = h;
  out.logz.assign(n + 1, 0.0);

  // Two passes per site: a max scan, then a compensated sum of the shifted
  // exponentials.  Terms more than 45 nats under the peak are dropped; each
  // contributes < 3e-20 of the total, far below the 1e-10 oracle tolerance.
  for (std::size_t m = 1; m <= n; ++m) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const double x = out.logz[j] + lk[m - j];
      if (x > peak) peak = x;
    }
    KahanSum acc;
    for (std::size_t j = 0; j < m; ++j) {
      const double x = out.logz[j] + lk[m - j] - peak;
      if (x > -45.0) acc.add(std::exp(x));
    }
    const double reward = h + (disorder.contains(m) ? beta : 0.0);
    out.logz[m] = reward + peak + std::log(acc.value());
  }

  // Free boundary: close each pinned prefix with the mass of gaps jumping
  // past the window edge.  tail(0) is the full unit mass, so j = n enters
  // with weight one.
  {
    std::vector<double> lt(n + 1, 0.0);
    for (std::size_t g = 1; g <= n; ++g) lt[g] = std::log(law.tail_mass(g));
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= n; ++j) {
      const double x = out.logz[j] + lt[n - j];
      if (x > peak) peak = x;
    }
    KahanSum acc;
    for (std::size_t j = 0; j <= n; ++j) {
      const double x = out.logz[j] + lt[n - j] - peak;
      if (x > -45.0) acc.add(std::exp(x));
    }
    out.logz_free = peak + std::log(acc.value());
  }
  return out;
}

QuenchedMcEstimate quenched_free_energy_mc(const PowerLawRenewal& law,
                                           const PowerLawRenewal& disorder_law,
                                           double beta, double h, std::size_t n,
                                           int replicas, std::uint64_t seed,
                                           int threads,
                                           bool stationary_start) {
  require_plain_law(law, "quenched_free_energy_mc");
  require_plain_law(disorder_law, "quenched_free_energy_mc");
  require_coupling(beta, h, "quenched_free_energy_mc");
  if (n < 8)
    throw std::invalid_argument("quenched_free_energy_mc: window too short");
  if (replicas < 16)
    throw std::invalid_argument(
        "quenched_free_energy_mc: needs at least 16 replicas for a jackknife");
  if (threads < 1)
    throw std::invalid_argument("quenched_free_energy_mc: threads must be >= 1");
  if (stationary_start && disorder_law.exponent <= 1.0)
    throw std::invalid_argument(
        "quenched_free_energy_mc: stationary start needs a finite mean gap");

  const GapSampler sampler(disorder_law);
  StationaryDelay delay;
  if (stationary_start) delay = stationary_delay(disorder_law);

  const std::size_t r = static_cast<std::size_t>(replicas);
  const std::size_t half = n / 2;
  std::vector<double> full_vals(r, 0.0), half_vals(r, 0.0);
  std::vector<std::exception_ptr> errors(r);

  parallel_for(r, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        Rng rng = worker_rng(seed, static_cast<std::uint64_t>(i));
        const std::uint64_t first =
            stationary_start ? sample_delay(delay, rng) : 0;
        const DisorderPath path = sample_path_with(sampler, n, rng, first);
        const LogPartitionTable tab =
            quenched_partition_dp(path, law, beta, h, n);
        full_vals[i] = tab.logz[n] / static_cast<double>(n);
        half_vals[i] = tab.logz[half] / static_cast<double>(half);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  QuenchedMcEstimate out;
  out.replicas = replicas;
  const ReplicaStats full = jackknife(full_vals);
  const ReplicaStats halfs = jackknife(half_vals);
  out.value = full.mean;
  out.se = full.se;
  out.half_value = halfs.mean;
  out.half_se = halfs.se;

  // Richardson step against the leading finite-size term.  The contact count
  // in [1, n] grows like n^a with a = min(exponent, 1), so the per-window
  // bias of (1/n) log Z decays like n^(a-1) and the pair (n/2, n) removes it
  // with weight w = 2^(1-a).  As a -> 1 the weight degenerates and the
  // correction is mostly noise, so fall back to the plain estimate there.
  const double a = std::min(disorder_law.exponent, 1.0);
  const double w = std::exp2(1.0 - a);
  if (w > 1.05) {
    std::vector<double> combo(r);
    for (std::size_t i = 0; i < r; ++i)
      combo[i] = (w * full_vals[i] - half_vals[i]) / (w - 1.0);
    const ReplicaStats c = jackknife(combo);
    out.bias_corrected = c.mean;
    out.bias_corrected_se = c.se;
  } else {
    out.bias_corrected = full.mean;
    out.bias_corrected_se = full.se;
  }
  return out;
}

TiltedDisorderMeasure tilted_disorder_enumerate(const std::vector<double>& gap_weights,
                                                std::size_t n, double theta) {
  if (n == 0)
    throw std::invalid_argument("tilted_disorder_enumerate: window must be positive");
  if (n > 20)
    throw std::invalid_argument(
        "tilted_disorder_enumerate: enumeration is capped at window 20");
  if (!std::isfinite(theta))
    throw std::invalid_argument("tilted_disorder_enumerate: theta must be finite");
  if (gap_weights.size() < n + 1)
    throw std::invalid_argument(
        "tilted_disorder_enumerate: gap weights must cover jumps up to the window");
  for (std::size_t g = 1; g <= n; ++g)
    if (!(gap_weights[g] > 0.0) || !std::isfinite(gap_weights[g]))
      throw std::invalid_argument(
          "tilted_disorder_enumerate: gap weights must be positive and finite");

  TiltedDisorderMeasure out;
  out.window = n;
  out.theta = theta;
  const unsigned interior = static_cast<unsigned>(n) - 1;
  const std::size_t count = std::size_t{1} << interior;
  out.weights.assign(count, 0.0);

  const double boost = std::exp(theta);
  KahanSum total;
  for (std::size_t mask = 0; mask < count; ++mask) {
    double w = 1.0;
    std::size_t prev = 0;
    for (unsigned b = 0; b < interior; ++b) {
      if (mask >> b & 1u) {
        w *= boost * gap_weights[b + 1 - prev];
        prev = b + 1;
      }
    }
    w *= boost * gap_weights[n - prev]; // final jump onto the pinned endpoint
    out.weights[mask] = w;
    total.add(w);
  }
  out.log_normalizer = std::log(total.value());
  for (double& w : out.weights) w /= total.value();
  return out;
}

TiltedDisorderMeasure tilted_disorder_enumerate(const PowerLawRenewal& disorder_law,
                                                std::size_t n, double theta) {
  require_plain_law(disorder_law, "tilted_disorder_enumerate");
  if (n == 0 || n > 20)
    throw std::invalid_argument(
        "tilted_disorder_enumerate: enumeration is capped at window 20");
  std::vector<double> kk(n + 1, 0.0);
  for (std::size_t g = 1; g <= n; ++g) kk[g] = disorder_law.k(g);
  return tilted_disorder_enumerate(kk, n, theta);
}

double TiltedDisorderMeasure::marginal(std::size_t site) const {
  if (site > window)
    throw std::out_of_range("TiltedDisorderMeasure: site outside the window");
  if (site == 0 || site == window) return 1.0;
  const unsigned bit = 1u << (site - 1);
  KahanSum s;
  for (std::size_t mask = 0; mask < weights.size(); ++mask)
    if (mask & bit) s.add(weights[mask]);
  return s.value();
}

MonotonicityReport monotonicity_check(const TiltedDisorderMeasure& measure) {
  const std::size_t n = measure.window;
  if (n == 0 || measure.weights.size() != (std::size_t{1} << (n - 1)))
    throw std::invalid_argument(
        "monotonicity_check: measure carries no enumeration table");

  MonotonicityReport rep;
  const unsigned interior = static_cast<unsigned>(n) - 1;
  if (interior == 0) return rep; // the endpoint alone, nothing to compare
  const auto& w = measure.weights;
  const unsigned full = static_cast<unsigned>(w.size() - 1);

  // Conditional occupation probabilities are ratios of weight products; any
  // rounding there sits at the 1e-14 scale, decades under real violations.
  const double slack = 1e-12;

  for (unsigned k = 0; k < interior; ++k) {
    const unsigned bit = 1u << k;
    const unsigned rest_all = full & ~bit;
    for (unsigned hi = rest_all;; hi = (hi - 1) & rest_all) {
      const double hi_on = w[hi | bit];
      const double hi_den = hi_on + w[hi];
      if (hi_den > 0.0) {
        const double p_hi = hi_on / hi_den;
        for (unsigned lo = hi;; lo = (lo - 1) & hi) {
          const double lo_on = w[lo | bit];
          const double lo_den = lo_on + w[lo];
          if (lo_den > 0.0 && p_hi < lo_on / lo_den - slack) {
            rep.monotone = false;
            rep.site = k + 1;
            rep.lower = lo;
            rep.upper = hi;
            return rep;
          }
          if (lo == 0) break;
        }
      }
      if (hi == 0) break;
    }
  }
  return rep;
}

TiltShiftReport tilt_vs_shift_probe(const PowerLawRenewal& law,
                                    const PowerLawRenewal& disorder_law,
                                    double beta, double h, double theta,
                                    std::size_t n, int replicas,
                                    std::uint64_t seed, int threads) {
  require_plain_law(law, "tilt_vs_shift_probe");
  require_plain_law(disorder_law, "tilt_vs_shift_probe");
  require_coupling(beta, h, "tilt_vs_shift_probe");
  if (disorder_law.exponent <= 1.0)
    throw std::domain_error(
        "tilt_vs_shift_probe: reward shifts need a finite mean gap in the disorder");
  if (!std::isfinite(theta))
    throw std::invalid_argument("tilt_vs_shift_probe: theta must be finite");
  if (n < 16)
    throw std::invalid_argument("tilt_vs_shift_probe: window too short");
  if (replicas < 16)
    throw std::invalid_argument(
        "tilt_vs_shift_probe: needs at least 16 replicas for a jackknife");
  if (threads < 1)
    throw std::invalid_argument("tilt_vs_shift_probe: threads must be >= 1");

  TiltShiftReport rep;
  rep.replicas = replicas;

  const GapSampler sampler(disorder_law);
  const std::size_t r = static_cast<std::size_t>(replicas);
  std::vector<double> contacts(r, 0.0), base_l(r, 0.0);
  std::array<std::vector<double>, 2> shift_l{std::vector<double>(r, 0.0),
                                             std::vector<double>(r, 0.0)};
  std::vector<std::exception_ptr> errors(r);

  parallel_for(r, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        Rng rng = worker_rng(seed, static_cast<std::uint64_t>(i));
        const DisorderPath path = sample_path_with(sampler, n, rng);
        std::size_t hits = 0;
        for (std::size_t m = 1; m <= n; ++m)
          if (path.contains(m)) ++hits;
        contacts[i] = static_cast<double>(hits);
        base_l[i] =
            quenched_partition_dp(path, law, beta, h, n).logz[n] /
            static_cast<double>(n);
        for (std::size_t c = 0; c < rep.c_values.size(); ++c) {
          const double hs = h + rep.c_values[c] * beta * theta;
          shift_l[c][i] =
              quenched_partition_dp(path, law, beta, hs, n).logz[n] /
              static_cast<double>(n);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const ReplicaStats base = jackknife(base_l);
  rep.base = base.mean;
  rep.base_se = base.se;
  for (std::size_t c = 0; c < rep.c_values.size(); ++c) {
    const ReplicaStats s = jackknife(shift_l[c]);
    rep.shifted[c] = s.mean;
    rep.shifted_se[c] = s.se;
  }

  // Self-normalized importance weights; the unknown tilted normalizer cancels
  // in the ratio.  Centering on the peak exponent keeps the weights in range.
  double cmax = 0.0;
  for (double v : contacts) cmax = std::max(cmax, v);
  std::vector<double> u(r, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    u[i] = std::exp(theta * (contacts[i] - cmax));
  KahanSum num, den;
  for (std::size_t i = 0; i < r; ++i) {
    num.add(u[i] * base_l[i]);
    den.add(u[i]);
  }
  rep.tilted = num.value() / den.value();
  rep.tilted_se = jackknife_ratio_se(u, base_l);

  // Paired error for tilted - base: delete one replica from both columns.
  {
    std::vector<double> diff_loo(r, 0.0);
    KahanSum btot;
    for (double v : base_l) btot.add(v);
    for (std::size_t i = 0; i < r; ++i) {
      const double t_i =
          (num.value() - u[i] * base_l[i]) / (den.value() - u[i]);
      const double b_i =
          (btot.value() - base_l[i]) / static_cast<double>(r - 1);
      diff_loo[i] = t_i - b_i;
    }
    rep.diff_se = pseudo_se(diff_loo);
  }
  return rep;
}

} // namespace pinren
