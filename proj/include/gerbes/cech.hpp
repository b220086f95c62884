#pragma once

#include "gerbes/nerve.hpp"

namespace gerbes {

// A (p,q)-cochain of the bicomplex: a q-form on every level-p nerve tuple's
// intersection.  Values are stored as expressions on the ambient model space;
// all comparisons restrict to the tuple's domain.
struct CechCochain {
  int p = 0;
  int q = 0;
  std::map<Tuple, ExteriorForm> values;

  const ExteriorForm& at(const Tuple& t) const {
    auto it = values.find(t);
    if (it == values.end()) throw std::out_of_range("cochain has no value on tuple");
    return it->second;
  }
};

// zero cochain in bidegree (p,q)
CechCochain zero_cochain(const CoverContext& ctx, int p, int q);

// Cech coboundary: alternating sum with sign (-1)^nu on deletion of the
// nu-th index.  Output bidegree (p+1, q).
CechCochain cech_delta(const CoverContext& ctx, const CechCochain& c);

// coordinate-wise exterior derivative of the values, bidegree (p, q+1)
CechCochain cochain_d(const CechCochain& c);

// Total differential D = delta + (-1)^p d, returned as its two components.
struct TotalD {
  CechCochain delta_part;  // (p+1, q)
  CechCochain d_part;      // (p, q+1), sign included
};
TotalD total_D(const CoverContext& ctx, const CechCochain& c);

// restriction of a global form to every cover element
CechCochain epsilon_star(const CoverContext& ctx, const ExteriorForm& a);

// Does the (0,q) cochain come from a single global form?  If so return it.
std::optional<ExteriorForm> glue_global(const CoverContext& ctx, const CechCochain& c);

bool cochain_zero(const CoverContext& ctx, const CechCochain& c, bool skip_degenerate = true);
bool cochain_equal(const CoverContext& ctx, const CechCochain& a, const CechCochain& b,
                   bool skip_degenerate = true);

// An integral Cech cocycle in bidegree (p,0).
struct IntegralCechCocycle {
  int p = 0;
  std::map<Tuple, Integer> values;
};

// A formal chain: tuples with integer coefficients, used to pair integral
// cocycles against fundamental cycles.
struct CechChain {
  int p = 0;
  std::vector<std::pair<Tuple, Integer>> terms;
};

Integer pair_cocycle_chain(const IntegralCechCocycle& z, const CechChain& c);

// boundary of a chain (alternating face sum); used by tests
CechChain chain_boundary(const CechChain& c);

// Fundamental 1-cycle of an n-arc circle cover: consecutive edges plus the
// wrap edge (0, n-1) with coefficient -1.
CechChain circle_fundamental_cycle(unsigned n);

// Shuffle (Eilenberg-Zilber) product of two cycles into a product cover whose
// index pairs are (major, minor) -> major * minor_count + minor.
CechChain ez_product_cycle(const CechChain& major, const CechChain& minor, size_t minor_count);

}  // namespace gerbes
