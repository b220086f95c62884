#pragma once

#include "gerbes/chern_weil.hpp"
#include "gerbes/formal.hpp"

namespace gerbes {

enum class FamilyBackend { ChartClassical, ChartStaircase, Formal };

// A trivialized abelian family over a product fibration Y = X x Z given by a
// global connection datum B (fibre coordinates first), an invariant monomial
// Q of degree n+1, and a declared fibre condition F_fibre^r = 0 (r = 1 means
// flat fibres).
struct ChartFamily {
  CoordinateSpace yspace;
  unsigned fibre_dim = 0;
  ExteriorForm B;
  InvariantMonomial Q;
  unsigned nilpotency = 1;

  unsigned n() const { return Q.degree - 1; }
  int ell() const { return 2 * static_cast<int>(n()) + 1 - static_cast<int>(fibre_dim); }
};

// B = sum z_j dx_j on T^k x R^k with Q = xi^k
ChartFamily flat_torus_family(unsigned k, const Rational& halfwidth = 2);

// the (2,0) fibre-bidegree component of F_B and the declared vanishing
struct FibreConditionReport {
  bool ok = false;
  ExteriorForm fibre_curvature;
};
FibreConditionReport verify_fibre_condition(const ChartFamily& fam);

struct FamilyInvariant {
  ExteriorForm rep;  // representative in Omega^ell(Z); only d rep and the
                     // periods are invariant
  int ell = 0;
  std::string backend;
};

FamilyInvariant lambda_family(const ChartFamily& fam, FamilyBackend backend);

// curvature formula: integral of Q(F_B^{n+1}) over the fibre equals
// (-1)^{ell-1} d Lambda
struct CurvatureCheck {
  bool ok = false;
  ExteriorForm fibre_integral_side;
  ExteriorForm d_lambda_side;
};
CurvatureCheck curvature_check(const ChartFamily& fam, const FamilyInvariant& inv);

// independence of the global extension under the fibre hypothesis
struct ExtensionReport {
  bool fibre_parts_equal = false;
  bool hypothesis_ok = false;
  bool difference_form_zero = false;  // the raw representative difference
  bool difference_trivial = false;    // d(diff) = 0 and exactness witnessed
};
ExtensionReport extension_independence(const ChartFamily& fam, const ExteriorForm& B1,
                                       bool allow_mismatch = false);

// ---------------------------------------------------------------------------
// Probes of the flat class.

struct ProbeResult {
  bool closed = false;
  // named cycles with exact periods
  std::vector<std::pair<std::string, Rational>> periods;
  ExteriorForm restricted;
};

// restriction of the invariant to the unit sphere S^{k-1} in the base, via
// the quarter-turn spherical parametrization (k = 2, 3, 4)
ProbeResult sphere_probe(const FamilyInvariant& inv);

// restriction to a torus subfamily z_{pairs} = (cos, sin) per chosen pair of
// base coordinates; returns coordinate-cycle periods
ProbeResult torus_probe(const FamilyInvariant& inv, const std::vector<std::pair<uint32_t, uint32_t>>& pairs);

// degree-d covering self-map on every probe circle: all periods multiply by d
ExteriorForm covering_pullback(const ExteriorForm& form_on_torus, int64_t degree);

// ---------------------------------------------------------------------------
// Case II: circle-group families via the dual-torus line bundle.

struct CaseIIFamily {
  ProductFibrationCover pf;
  LineBundleData lb;
};

CaseIIFamily dual_torus_family(PouKind pou = PouKind::C1Cubic, unsigned arcs = 3);

struct CaseIIInvariant {
  DeligneCocycle dc;         // the pushed-forward class on the base cover
  ExteriorForm curvature;    // of dc
  Integer bockstein_pairing; // against the base fundamental cycle
  // empirical sign s with curvature = s * classical fibre integral of F_B
  int curvature_sign = 0;
  bool verified = false;
};
CaseIIInvariant lambda_family_case2(const CaseIIFamily& fam);

// ---------------------------------------------------------------------------
// Flat-fibre (q = 0) scenario helpers.

// A declared deformation of the connection datum: B(tau) = B + tau * P.
struct Deformation {
  ExteriorForm direction;  // P, base-legged to keep the fibres flat
};

// flat-class periods along the deformation at the sampled parameters, via
// the sphere probe; the rigidity statement is exact constancy
struct RigidityReport {
  bool constant = true;
  std::vector<std::pair<Rational, std::vector<Rational>>> samples;
};
RigidityReport rigidity_probe(const ChartFamily& fam, const Deformation& def,
                              const std::vector<Rational>& taus);

}  // namespace gerbes
