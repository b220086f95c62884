#pragma once

#include "gerbes/fibre_integration.hpp"

namespace gerbes {

// An invariant monomial Q = coeff * xi^degree for the abelian scenario
// groups; evaluation on an abelian curvature is coeff * F^degree.
struct InvariantMonomial {
  unsigned degree = 1;
  Rational coeff = 1;
};

inline InvariantMonomial operator*(const InvariantMonomial& a, const InvariantMonomial& b) {
  return InvariantMonomial{a.degree + b.degree, a.coeff * b.coeff};
}

// coeff * F^degree; closed for closed F of degree 2
ExteriorForm chern_weil_form(const InvariantMonomial& Q, const ExteriorForm& F);

// the transgression of Q = coeff * xi^{n+1} for a trivialized abelian bundle:
// Lambda = coeff * B ^ (dB)^n, with d Lambda = chern_weil_form(Q, dB)
ExteriorForm cs_transgression_abelian(const ExteriorForm& B, unsigned n,
                                      const Rational& coeff = 1);

// variational formula along the affine path A_t = (1-t)A0 + t A1:
// bulk = (n+1) * coeff * int_0^1 (A1 - A0) ^ F_t^n dt, and the difference of
// transgressions minus the bulk is exact.
struct VariationReport {
  ExteriorForm bulk;
  bool difference_closed = false;
  bool exactness_witnessed = false;  // primitive found (box base) or all periods vanish
};
VariationReport variational_delta(const InvariantMonomial& Q, const ExteriorForm& A0,
                                  const ExteriorForm& A1);

// primitive of a closed polynomial form on a star-shaped box (cone operator);
// returns nothing when the form has periodic coordinates or pieces
std::optional<ExteriorForm> poincare_primitive(const ExteriorForm& closed);

// multiplicativity: Lambda(Q1 Q2, B) = Q1(F) ^ Lambda(Q2, B) up to d-exact
struct ProductIdentityReport {
  bool exact_equal = false;
  bool up_to_exact = false;
};
ProductIdentityReport product_identity_check(const InvariantMonomial& Q1,
                                             const InvariantMonomial& Q2, const ExteriorForm& B);

// beta ^ (d beta)^n with the symbolic identity d(beta ^ (d beta)^n) =
// (d beta)^{n+1} verified
struct GvReport {
  ExteriorForm form;
  bool identity_ok = false;
};
GvReport gv_form(const ExteriorForm& beta, unsigned n);

// ---------------------------------------------------------------------------
// Circle-group line bundles as local data on a cover.

struct LineBundleData {
  // local connection 1-forms, one per cover element
  CechCochain connection;  // bidegree (0,1)
  // phase lifts of the transitions on level-1 tuples (functions); the
  // windings are delta(phase) on triples, integers by the cocycle condition
  CechCochain phase;  // bidegree (1,0)
};

struct LineBundleReport {
  bool ok = true;
  std::vector<CheckLine> lines;
};
LineBundleReport verify_line_bundle(const CoverContext& ctx, const LineBundleData& lb);

// the degree-2 class with connection: omega^0 = A, omega^1 = -phase,
// theta = phase mod Z; passes verify_deligne
DeligneCocycle line_bundle_deligne(const CoverContext& ctx, const LineBundleData& lb);

// tensor power: windings, phases and connections scale by k
LineBundleData tensor_power(const LineBundleData& lb, const Integer& k);

// The tautological line bundle over T x T^ (fibre circle coordinate x, base
// circle coordinate xi) on the product fibration cover: connection xi_i dx
// with xi_i the branch of xi over base arc i, transitions with winding given
// by the branch jumps.  Curvature is the normalized d xi ^ dx.
LineBundleData dual_torus_line_bundle(const ProductFibrationCover& pf);

// branch of a circle coordinate over an arc element of a circle cover, as a
// piecewise expression on the ambient space
Piecewise circle_branch(const CoverContext& ctx, uint32_t coord, const Domain& arc_domain,
                        const std::vector<Rational>& grid);

}  // namespace gerbes
