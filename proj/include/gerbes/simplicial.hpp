#pragma once

#include "gerbes/deligne.hpp"

namespace gerbes {

// A simplicial k-form on the nerve: for every level p <= max_level and every
// level-p tuple, a k-form on Delta^p x (tuple intersection), stored on the
// product space with the barycentric block leading.  Face compatibility is
// verified, not assumed; the normal flag records degeneracy compatibility.
struct SimplicialForm {
  int degree = 0;
  size_t max_level = 0;
  std::vector<std::map<Tuple, ExteriorForm>> values;
  bool normal_hint = false;

  const ExteriorForm& at(size_t p, const Tuple& t) const {
    auto it = values.at(p).find(t);
    if (it == values.at(p).end()) throw std::out_of_range("no value on tuple");
    return it->second;
  }
};

CoordinateSpace level_space(const CoverContext& ctx, size_t p);

// zero simplicial form of the given degree
SimplicialForm zero_simplicial(const CoverContext& ctx, int degree, size_t max_level);

// t-independent lift of a global form (normal by construction)
SimplicialForm eps_star_simplicial(const CoverContext& ctx, const ExteriorForm& a,
                                   size_t max_level);

// substitution of the simplex face map Delta^{p-1} -> Delta^p (insert 0 at
// slot i) between level spaces; manifold coordinates map by name
Substitution simplex_face_sub(const CoverContext& ctx, size_t p, size_t i);
// substitution of the degeneracy Delta^{p+1} -> Delta^p (add slots j, j+1)
Substitution simplex_degeneracy_sub(const CoverContext& ctx, size_t p, size_t j);

// exterior derivative, levelwise
SimplicialForm simplicial_d(const SimplicialForm& s);

struct SimplicialReport {
  bool ok = true;
  std::vector<CheckLine> lines;
  void add(const std::string& name, bool pass) {
    lines.push_back({name, pass, pass ? 0.0 : 1.0, ""});
    ok = ok && pass;
  }
};

// face compatibility (simplicial); degeneracy compatibility (normal)
SimplicialReport verify_simplicial(const CoverContext& ctx, const SimplicialForm& s);
SimplicialReport verify_normal(const CoverContext& ctx, const SimplicialForm& s);

// Integration over the simplex factor: one Cech cochain per bidegree (p, k-p).
std::vector<CechCochain> i_delta(const CoverContext& ctx, const SimplicialForm& s);

// Whitney lift of a total-degree-k cochain collection c = (c^0..c^K), c^nu in
// bidegree (nu, k-nu): a chain map with i_delta(whitney_lift(c)) = c.
SimplicialForm whitney_lift(const CoverContext& ctx, const std::vector<CechCochain>& c,
                            size_t max_level);

// elementary Whitney form on the vertex subset a_0 < ... < a_nu of Delta^p
ExteriorForm whitney_elementary(const CoverContext& ctx, size_t p,
                                const std::vector<uint32_t>& vertices);

// discreteness / integrality per Definition of discrete and integral forms
struct DiscreteReport {
  bool discrete = false;
  bool integral = false;
};
DiscreteReport discrete_integral_check(const CoverContext& ctx, const SimplicialForm& s);

// A simplicial gerbe: dLambda = eps* alpha - eta* beta with alpha global and
// beta integral discrete.  verify_gerbe recovers alpha and the integer
// cochain of beta and checks the residual at every level.
struct GerbeCheck {
  bool ok = true;
  std::optional<ExteriorForm> alpha;
  std::optional<IntegralCechCocycle> beta;
  std::vector<CheckLine> lines;
};
GerbeCheck verify_gerbe(const CoverContext& ctx, const SimplicialForm& lambda);

// Extraction of the gerbe with connection: omega^nu = int_{Delta^nu}
// Lambda^nu, theta = -omega^ell; the output passes verify_deligne and its
// curvature equals alpha.
DeligneCocycle extract_gerbe(const CoverContext& ctx, const SimplicialForm& lambda);

// The characteristic integer cocycle of a simplicial gerbe, computed from
// -int_{Delta^{ell+1}} (dLambda)^{ell+1}; agrees with the Bockstein class of
// the extracted cocycle.
IntegralCechCocycle beta_of(const CoverContext& ctx, const SimplicialForm& lambda);

// Whitney realization of an integral cocycle (a discrete integral form).
SimplicialForm whitney_of_integral(const CoverContext& ctx, const IntegralCechCocycle& z,
                                   size_t max_level);

}  // namespace gerbes
