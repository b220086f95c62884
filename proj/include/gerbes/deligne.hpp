#pragma once

#include "gerbes/cech.hpp"

namespace gerbes {

// A gerbe with connection at level ell: a sequence omega^0..omega^ell with
// omega^nu in bidegree (nu, ell-nu), plus the real lift theta of the
// underlying mod-Z cocycle, with omega^ell = -theta mod Z.
struct DeligneCocycle {
  int level = 0;
  std::vector<CechCochain> omega;
  CechCochain theta;
};

// trivial-gerbe connection from a global ell-form (theta = 0, omega^0 = eps*w)
DeligneCocycle global_form_cocycle(const CoverContext& ctx, const ExteriorForm& w);

struct CheckLine {
  std::string name;
  bool pass = true;
  double residual = 0.0;  // 0 for exact passes
  std::string note;
};

struct DeligneReport {
  bool ok = true;
  std::vector<CheckLine> checks;
  std::optional<ExteriorForm> curvature;

  void add(const std::string& name, bool pass, const std::string& note = "") {
    checks.push_back({name, pass, pass ? 0.0 : 1.0, note});
    ok = ok && pass;
  }
};

// Verify the cocycle conditions: delta omega^{nu-1} + (-1)^nu d omega^nu = 0
// for nu = 1..ell, delta omega^ell integral, omega^ell = -theta mod Z, and
// d omega^0 glues to a global closed curvature form.
DeligneReport verify_deligne(const CoverContext& ctx, const DeligneCocycle& dc);

// The unique global (ell+1)-form F with eps*F = d omega^0; throws when the
// overlap values disagree.
ExteriorForm curvature(const CoverContext& ctx, const DeligneCocycle& dc);

bool is_flat(const CoverContext& ctx, const DeligneCocycle& dc);

// z = -delta omega^ell, rounded to exact integers; delta z = 0.
IntegralCechCocycle bockstein_class(const CoverContext& ctx, const DeligneCocycle& dc);

// Equivalence move: add the total coboundary of a witness sequence
// b = (b^0..b^{ell-1}), b^nu of bidegree (nu, ell-1-nu).
DeligneCocycle apply_equivalence(const CoverContext& ctx, const DeligneCocycle& dc,
                                 const std::vector<CechCochain>& witness);

// ---------------------------------------------------------------------------
// Periods.

// Exact periods of a closed form over the coordinate subtori of a torus
// model: one value per ascending coordinate subset of size = degree, with the
// other coordinates pinned to 0.
struct PeriodTable {
  std::vector<std::pair<std::vector<uint32_t>, Rational>> entries;
};
PeriodTable periods(const ExteriorForm& a);

// Holonomy of a level-1 cocycle along the cycle of one circle factor (other
// coordinates pinned to 0): well-defined mod Z; returned as a real
// representative in [0,1).
Rational holonomy_circle_factor(const CoverContext& ctx, const DeligneCocycle& dc,
                                uint32_t factor_coord);

}  // namespace gerbes
