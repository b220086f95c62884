#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gerbes/piecewise.hpp"
#include "vendor_json_fwd.hpp"

namespace gerbes {

using WedgeMask = uint64_t;

inline int popcount(WedgeMask m) { return __builtin_popcountll(m); }
inline bool mask_has(WedgeMask m, uint32_t c) { return (m >> c) & 1ull; }

// Sign of concatenating ascending wedge blocks I and J (disjoint).
int concat_sign(WedgeMask a, WedgeMask b);
// Sign of moving the S-differentials (ascending) to the front of mask.
int front_extraction_sign(WedgeMask mask, WedgeMask s);

// A homogeneous exterior form with exact piecewise coefficients over a chart
// product.  Wedge monomials are stored as bitmasks over the space's
// coordinates in strictly increasing order; zero coefficients are pruned.
struct ExteriorForm {
  CoordinateSpace space;
  int degree = 0;
  std::map<WedgeMask, Piecewise> terms;

  ExteriorForm() = default;
  ExteriorForm(CoordinateSpace s, int deg) : space(std::move(s)), degree(deg) {}

  bool is_zero() const { return terms.empty(); }

  void add_term(WedgeMask m, const Piecewise& c) {
    if (popcount(m) != degree) throw std::invalid_argument("wedge degree mismatch");
    if (c.is_zero()) return;
    auto it = terms.find(m);
    if (it == terms.end())
      terms.emplace(m, c);
    else {
      it->second = it->second + c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  static ExteriorForm zero(const CoordinateSpace& s, int deg) { return ExteriorForm(s, deg); }

  // 0-form from a scalar expression
  static ExteriorForm scalar(const CoordinateSpace& s, Piecewise c) {
    ExteriorForm f(s, 0);
    f.add_term(0, c);
    return f;
  }

  // coordinate differential dx_i
  static ExteriorForm d_coord(const CoordinateSpace& s, uint32_t i) {
    ExteriorForm f(s, 1);
    f.add_term(WedgeMask(1) << i, Piecewise(s.dim(), Poly(Rational(1))));
    return f;
  }
};

ExteriorForm operator+(const ExteriorForm& a, const ExteriorForm& b);
ExteriorForm operator-(const ExteriorForm& a, const ExteriorForm& b);
ExteriorForm operator*(const ExteriorForm& a, const Rational& s);
inline ExteriorForm operator-(const ExteriorForm& a) { return a * Rational(-1); }

// Graded wedge product; exact inputs give exact output.
ExteriorForm wedge(const ExteriorForm& a, const ExteriorForm& b);
ExteriorForm wedge_pow(const ExteriorForm& a, unsigned n);

// Exterior derivative (graded Leibniz, d*d = 0 exactly).
ExteriorForm exterior_d(const ExteriorForm& a);

// Is a == b as forms on the given domain (defaults to everywhere)?
bool equal_on(const ExteriorForm& a, const ExteriorForm& b, const Domain& dom);
bool equal_forms(const ExteriorForm& a, const ExteriorForm& b);
bool zero_on(const ExteriorForm& a, const Domain& dom);

// Max |coefficient| over a sample grid; used for numeric residual reports.
double sup_sample(const ExteriorForm& a, int samples_per_axis = 5);

// ---------------------------------------------------------------------------
// Pullback along an exact substitution.

struct Substitution {
  CoordinateSpace src, dst;
  // one exact expression on dst per src coordinate
  std::vector<Piecewise> map;

  // identity on coordinates with matching names
  static Substitution identity_extend(const CoordinateSpace& src, const CoordinateSpace& dst);
  void set(uint32_t src_coord, Piecewise expr) { map.at(src_coord) = std::move(expr); }
  void set_poly(uint32_t src_coord, const Poly& p) {
    map.at(src_coord) = Piecewise(dst.dim(), p);
  }
};

// Functorial pullback: commutes with d and wedge.  Trig substitution rules
// and breakpoint transport restrictions are documented in poly.hpp.
ExteriorForm pullback(const Substitution& s, const ExteriorForm& a);

// ---------------------------------------------------------------------------
// Integration.

// Exact integration over full periods of the selected periodic coordinates,
// integrating the variables starting from the left.  Terms missing any
// selected differential integrate to zero.
ExteriorForm integrate_periodic(const ExteriorForm& a, const std::vector<uint32_t>& coords);

// Same contract, but over each coordinate's full domain interval (used for
// box factors and sphere-parameter probes with quarter-turn bounds).
ExteriorForm integrate_coords_full(const ExteriorForm& a, const std::vector<uint32_t>& coords);

// Integration over the leading barycentric block of level p: extracts the
// part of barycentric degree exactly p and integrates over the standard
// simplex with the orientation \int_{Delta^p} dt_1...dt_p = 1/p!.
// The result lives on the same space with the t-block dependence removed.
ExteriorForm integrate_simplex(const ExteriorForm& a, size_t p);

// Drop the leading barycentric block from the space of a form that no longer
// depends on it (after integrate_simplex).
ExteriorForm drop_simplex_block(const ExteriorForm& a, size_t p);

// Insert a leading barycentric block (form independent of it).
ExteriorForm lift_to_simplex(const ExteriorForm& a, size_t p);

// ---------------------------------------------------------------------------
// Canonical JSON shape (deterministic ordering for diffable output).
nlohmann::json to_json(const ExteriorForm& a);

}  // namespace gerbes
