#pragma once

#include "pinren/renewal.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pinren {

// Moment layer: cluster expansions of the disorder-averaged partition
// function in powers of z = e^beta - 1, the backward gap decomposition of a
// pair of finite sets, and the decoupling machinery that bounds the second
// moment by decoupled products.

// Gaps of a set pair, produced by backward exploration: repeatedly take the
// largest remaining point overall, measure its distance to the opposite
// set's next point below-or-equal, and discard everything from the matched
// point upward on both sides.  A shared point contributes a zero gap, so
// the number of zeros equals the intersection size.
struct GapDecomposition {
  std::vector<std::uint64_t> gaps;

  std::size_t zeros() const {
    std::size_t z = 0;
    for (auto g : gaps)
      if (g == 0) ++z;
    return z;
  }
};

// Inputs are strictly increasing sequences of positive integers; an empty
// side yields an empty decomposition.
GapDecomposition gap_decompose(const std::vector<std::uint64_t>& first,
                               const std::vector<std::uint64_t>& second);

// r(i) = sup_{j >= i} |1 - u(i)/u(j)| for a table of return probabilities
// with a positive limit.  The sup splits into a finite scan over the table
// suffix plus the limit term |1 - u(i)/limit|.  Index 0 must hold u(0) = 1.
std::vector<double> r_profile(const std::vector<double>& uhat, double limit);

// Same quantity for a power-law disorder with finite mean gap; the table is
// built to `horizon` and the limit is the inverse mean.  Throws domain_error
// when the mean gap diverges (no positive limit to compare against).
double r_function(const PowerLawRenewal& disorder, std::size_t i,
                  std::size_t horizon);

// Does P(I u J subset of tau-hat) <= P(I) P(J) prod_m (1 + r(gap_m))?
// Evaluated exactly from the mass-function table; `holds` allows relative
// rounding of 1e-12 on the right-hand side.
struct DecouplingCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

DecouplingCheck decoupling_check(const PowerLawRenewal& disorder,
                                 const std::vector<std::uint64_t>& first,
                                 const std::vector<std::uint64_t>& second,
                                 std::size_t horizon);

// Subset expansions of the disorder-averaged partition function over a
// window of n sites, in powers of z = e^beta - 1.  Order 1 sums
// z^|I| U_h(I) Uhat(I) over single subsets; order 2 sums over pairs with
// the disorder factor taken on the union.  The chain law arrives already
// tilted (defective for negative rewards).  Exact enumeration, n <= 12.
double moment_cluster_expansion(int order, const PowerLawRenewal& base_tilted,
                                const PowerLawRenewal& disorder, double beta,
                                std::size_t n);

// The same order-2 sum by a last-contact-pair dynamic program: states are
// the current last points of the two chain copies, the disorder factor
// couples to their running maximum.  O(n^3) time, O(n^2) memory, n <= 300.
double second_moment_dp(const PowerLawRenewal& base_tilted,
                        const PowerLawRenewal& disorder, double beta,
                        std::size_t n);

// First and second moments along a window grid with the chain tilted to the
// critical curve at the given coupling.  first_moment_max tracks the
// largest first moment seen; second_moment_growth is the relative increase
// of the second moment from the first grid point to the last.
struct BoundednessReport {
  std::vector<std::size_t> n_grid;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  double first_moment_max = 0.0;
  double second_moment_growth = 0.0;
  double coupling_height = 0.0; // critical reward the chain was tilted to
};

BoundednessReport boundedness_probe(const PowerLawRenewal& base,
                                    const PowerLawRenewal& disorder,
                                    double beta,
                                    const std::vector<std::size_t>& n_grid);

} // namespace pinren
