#include "pinren/moments.hpp"

#include "pinren/annealed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace pinren {
namespace {

PowerLawRenewal with_horizon(PowerLawRenewal law, std::size_t horizon) {
  if (law.horizon < horizon) law.horizon = horizon;
  return law;
}

void require_sorted_set(const std::vector<std::uint64_t>& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0)
      throw std::invalid_argument("set elements must be positive");
    if (i > 0 && s[i] <= s[i - 1])
      throw std::invalid_argument("set must be strictly increasing");
  }
}

void require_coupling(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("coupling strength must be finite and nonnegative");
}

void require_chain_law(const PowerLawRenewal& law) {
  if (!(law.exponent > 0.0) || !std::isfinite(law.exponent))
    throw std::invalid_argument("chain law needs a positive tail exponent");
  if (law.tilt > 0.0)
    throw std::invalid_argument("chain tilts are nonpositive");
}

void require_disorder_law(const PowerLawRenewal& law) {
  if (!(law.exponent > 0.0) || !std::isfinite(law.exponent))
    throw std::invalid_argument("disorder law needs a positive tail exponent");
  if (!law.recurrent())
    throw std::invalid_argument("disorder law must be recurrent");
}

// P(S subset of the renewal set) as a product of return probabilities over
// increments; the empty product is 1.
double subset_mass(const std::vector<double>& u,
                   const std::vector<std::uint64_t>& s) {
  double w = 1.0;
  std::uint64_t prev = 0;
  for (auto p : s) {
    w *= u[static_cast<std::size_t>(p - prev)];
    prev = p;
  }
  return w;
}

// Partial sums of the subset expansion grouped by largest element:
// v(m) = sum_{j<m} v(j) z u_h(m-j) uhat(m-j), v(0) = 1.  Entry m of the
// result is the expansion over subsets of [1, m].
std::vector<double> first_moment_partials(const std::vector<double>& uh,
                                          const std::vector<double>& ud,
                                          double z, std::size_t n) {
  std::vector<double> v(n + 1, 0.0), partial(n + 1, 0.0);
  v[0] = 1.0;
  partial[0] = 1.0;
  for (std::size_t m = 1; m <= n; ++m) {
    KahanSum acc;
    for (std::size_t j = 0; j < m; ++j)
      acc.add(v[j] * uh[m - j] * ud[m - j]);
    v[m] = z * acc.value();
    partial[m] = partial[m - 1] + v[m];
  }
  return partial;
}

// Pair expansion by last contacts (li, lj) of the two chain copies.  A new
// point m extends one copy or both; the disorder factor couples to the
// union of the copies, so each extension pays uhat measured from the
// running maximum of the pair.  Defective chain mass needs no bookkeeping:
// a copy that never returns simply stops contributing factors.  Entry m of
// the result is the pair expansion over the window [1, m].
std::vector<double> second_moment_partials(const std::vector<double>& uh,
                                           const std::vector<double>& ud,
                                           double z, std::size_t n) {
  const std::size_t w = n + 1;
  std::vector<double> a(w * w, 0.0);
  a[0] = 1.0;
  std::vector<double> partial(n + 1, 0.0);
  KahanSum total;
  total.add(1.0);
  partial[0] = 1.0;
  std::vector<double> add_first(w, 0.0), add_second(w, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    // first copy hops to m; the union maximum is max(li, lj)
    for (std::size_t lj = 0; lj < m; ++lj) {
      double below = 0.0;
      for (std::size_t li = 0; li <= lj; ++li)
        below += a[li * w + lj] * uh[m - li];
      double above = 0.0;
      for (std::size_t li = lj + 1; li < m; ++li)
        above += a[li * w + lj] * uh[m - li] * ud[m - li];
      add_first[lj] = z * (below * ud[m - lj] + above);
    }
    // second copy hops to m
    for (std::size_t li = 0; li < m; ++li) {
      double below = 0.0;
      for (std::size_t lj = 0; lj <= li; ++lj)
        below += a[li * w + lj] * uh[m - lj];
      double above = 0.0;
      for (std::size_t lj = li + 1; lj < m; ++lj)
        above += a[li * w + lj] * uh[m - lj] * ud[m - lj];
      add_second[li] = z * (below * ud[m - li] + above);
    }
    // both copies meet at m; group resident states by their maximum l
    double both = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      double row = 0.0;
      for (std::size_t lj = 0; lj <= l; ++lj)
        row += a[l * w + lj] * uh[m - lj];
      for (std::size_t li = 0; li < l; ++li)
        row += a[li * w + l] * uh[m - li];
      both += row * uh[m - l] * ud[m - l];
    }
    both *= z * z;
    for (std::size_t lj = 0; lj < m; ++lj) {
      a[m * w + lj] = add_first[lj];
      total.add(add_first[lj]);
    }
    for (std::size_t li = 0; li < m; ++li) {
      a[li * w + m] = add_second[li];
      total.add(add_second[li]);
    }
    a[m * w + m] = both;
    total.add(both);
    partial[m] = total.value();
  }
  return partial;
}

} // namespace

GapDecomposition gap_decompose(const std::vector<std::uint64_t>& first,
                               const std::vector<std::uint64_t>& second) {
  require_sorted_set(first);
  require_sorted_set(second);
  GapDecomposition out;
  std::size_t ei = first.size(), ej = second.size();
  while (ei > 0 && ej > 0) {
    const std::uint64_t a = first[ei - 1];
    const std::uint64_t b = second[ej - 1];
    if (a == b) {
      // shared top point, matched at distance zero; both sides drop it
      out.gaps.push_back(0);
      --ei;
      --ej;
    } else if (a < b) {
      // match the top of the first set against the lowest point of the
      // second set beyond it, then discard that point and everything above
      const auto it = std::upper_bound(second.begin(), second.begin() + ej, a);
      out.gaps.push_back(*it - a);
      ej = static_cast<std::size_t>(it - second.begin());
    } else {
      const auto it = std::upper_bound(first.begin(), first.begin() + ei, b);
      out.gaps.push_back(*it - b);
      ei = static_cast<std::size_t>(it - first.begin());
    }
  }
  return out;
}

std::vector<double> r_profile(const std::vector<double>& uhat, double limit) {
  if (uhat.size() < 2)
    throw std::invalid_argument("return table needs at least indices 0 and 1");
  if (!(limit > 0.0) || !std::isfinite(limit))
    throw std::invalid_argument("return probabilities need a positive limit");
  if (std::abs(uhat[0] - 1.0) > 1e-12)
    throw std::invalid_argument("a renewal set always contains the origin");
  for (double v : uhat)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("return probabilities must be positive");

  const std::size_t top = uhat.size() - 1;
  // |1 - u(i)/x| over an interval of x is largest at an endpoint, so the
  // sup over j >= i needs only the suffix extrema plus the limit value
  std::vector<double> lo(uhat.size()), hi(uhat.size());
  lo[top] = hi[top] = uhat[top];
  for (std::size_t i = top; i-- > 0;) {
    lo[i] = std::min(uhat[i], lo[i + 1]);
    hi[i] = std::max(uhat[i], hi[i + 1]);
  }
  std::vector<double> r(uhat.size(), 0.0);
  for (std::size_t i = 0; i <= top; ++i) {
    const double at_lo = std::abs(1.0 - uhat[i] / lo[i]);
    const double at_hi = std::abs(1.0 - uhat[i] / hi[i]);
    const double at_limit = std::abs(1.0 - uhat[i] / limit);
    r[i] = std::max({at_lo, at_hi, at_limit});
  }
  return r;
}

double r_function(const PowerLawRenewal& disorder, std::size_t i,
                  std::size_t horizon) {
  require_disorder_law(disorder);
  if (disorder.exponent <= 1.0)
    throw std::domain_error(
        "return probabilities have no positive limit when the mean gap "
        "diverges");
  if (horizon < 1 || i > horizon)
    throw std::invalid_argument("index must sit inside the table horizon");
  const MassFunctionTable t =
      mass_function(with_horizon(disorder, horizon), horizon);
  return r_profile(t.values, t.mean_inverse)[i];
}

DecouplingCheck decoupling_check(const PowerLawRenewal& disorder,
                                 const std::vector<std::uint64_t>& first,
                                 const std::vector<std::uint64_t>& second,
                                 std::size_t horizon) {
  require_disorder_law(disorder);
  if (disorder.exponent <= 1.0)
    throw std::domain_error(
        "return probabilities have no positive limit when the mean gap "
        "diverges");
  const GapDecomposition gd = gap_decompose(first, second);
  if (horizon < 1)
    throw std::invalid_argument("horizon must be positive");
  if ((!first.empty() && first.back() > horizon) ||
      (!second.empty() && second.back() > horizon))
    throw std::invalid_argument("set elements must sit inside the horizon");

  const MassFunctionTable t =
      mass_function(with_horizon(disorder, horizon), horizon);
  const std::vector<double> r = r_profile(t.values, t.mean_inverse);

  std::vector<std::uint64_t> joined;
  joined.reserve(first.size() + second.size());
  std::set_union(first.begin(), first.end(), second.begin(), second.end(),
                 std::back_inserter(joined));

  DecouplingCheck out;
  out.lhs = subset_mass(t.values, joined);
  double penalty = 1.0;
  for (auto g : gd.gaps)
    penalty *= 1.0 + r[static_cast<std::size_t>(g)];
  out.rhs = subset_mass(t.values, first) * subset_mass(t.values, second) *
            penalty;
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12);
  return out;
}

double moment_cluster_expansion(int order, const PowerLawRenewal& base_tilted,
                                const PowerLawRenewal& disorder, double beta,
                                std::size_t n) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("expansion order must be 1 or 2");
  if (n < 1 || n > 12)
    throw std::invalid_argument("subset enumeration is capped at 12 sites");
  require_coupling(beta);
  require_chain_law(base_tilted);
  require_disorder_law(disorder);

  const MassFunctionTable uh = mass_function(with_horizon(base_tilted, n), n);
  const MassFunctionTable ud = mass_function(with_horizon(disorder, n), n);
  const double z = std::expm1(beta);
  const std::size_t count = std::size_t{1} << n;

  // weight[mask] built off the top site: strip it, multiply the increment
  // factor against the next site below (bit b stands for site b + 1)
  std::vector<double> wh(count, 0.0), wd(count, 0.0);
  wh[0] = 1.0;
  wd[0] = 1.0;
  for (std::size_t mask = 1; mask < count; ++mask) {
    const int top = 31 - __builtin_clz(static_cast<unsigned>(mask));
    const std::size_t rest = mask ^ (std::size_t{1} << top);
    const int below =
        rest ? 31 - __builtin_clz(static_cast<unsigned>(rest)) : -1;
    const std::size_t gap = static_cast<std::size_t>(top - below);
    wh[mask] = wh[rest] * z * uh.values[gap];
    wd[mask] = wd[rest] * ud.values[gap];
  }

  KahanSum acc;
  if (order == 1) {
    for (std::size_t mask = 0; mask < count; ++mask)
      acc.add(wh[mask] * wd[mask]);
    return acc.value();
  }
  for (std::size_t a = 0; a < count; ++a) {
    if (wh[a] == 0.0)
      continue;
    double inner = 0.0;
    for (std::size_t b = 0; b < count; ++b)
      inner += wh[b] * wd[a | b];
    acc.add(wh[a] * inner);
  }
  return acc.value();
}

double second_moment_dp(const PowerLawRenewal& base_tilted,
                        const PowerLawRenewal& disorder, double beta,
                        std::size_t n) {
  if (n < 1 || n > 300)
    throw std::invalid_argument("pair program is capped at 300 sites");
  require_coupling(beta);
  require_chain_law(base_tilted);
  require_disorder_law(disorder);
  const MassFunctionTable uh = mass_function(with_horizon(base_tilted, n), n);
  const MassFunctionTable ud = mass_function(with_horizon(disorder, n), n);
  return second_moment_partials(uh.values, ud.values, std::expm1(beta), n)
      .back();
}

BoundednessReport boundedness_probe(const PowerLawRenewal& base,
                                    const PowerLawRenewal& disorder,
                                    double beta,
                                    const std::vector<std::size_t>& n_grid) {
  if (n_grid.empty())
    throw std::invalid_argument("window grid must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || n_grid[i] > 300)
      throw std::invalid_argument("window grid must sit inside [1, 300]");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("window grid must be strictly increasing");
  }
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("coupling strength must be positive");
  require_chain_law(base);
  if (!base.recurrent())
    throw std::invalid_argument("probe tilts the chain itself");
  require_disorder_law(disorder);

  BoundednessReport out;
  out.n_grid = n_grid;
  out.coupling_height = annealed_critical_point(base, disorder, beta);
  const PowerLawRenewal tilted =
      out.coupling_height < 0.0 ? tilt_law(base, out.coupling_height) : base;

  const std::size_t n = n_grid.back();
  const MassFunctionTable uh = mass_function(with_horizon(tilted, n), n);
  const MassFunctionTable ud = mass_function(with_horizon(disorder, n), n);
  const double z = std::expm1(beta);
  const std::vector<double> m1 = first_moment_partials(uh.values, ud.values, z, n);
  const std::vector<double> m2 = second_moment_partials(uh.values, ud.values, z, n);

  out.first_moment.reserve(n_grid.size());
  out.second_moment.reserve(n_grid.size());
  for (auto m : n_grid) {
    out.first_moment.push_back(m1[m]);
    out.second_moment.push_back(m2[m]);
    out.first_moment_max = std::max(out.first_moment_max, m1[m]);
  }
  out.second_moment_growth = m2[n_grid.back()] / m2[n_grid.front()] - 1.0;
  return out;
}

} // namespace pinren
