#include "gerbes/chern_weil.hpp"

namespace gerbes {

ExteriorForm chern_weil_form(const InvariantMonomial& Q, const ExteriorForm& F) {
  if (F.degree != 2) throw std::invalid_argument("abelian curvature must have degree 2");
  return wedge_pow(F, Q.degree) * Q.coeff;
}

ExteriorForm cs_transgression_abelian(const ExteriorForm& B, unsigned n, const Rational& coeff) {
  if (B.degree != 1) throw std::invalid_argument("connection form must have degree 1");
  return wedge(B, wedge_pow(exterior_d(B), n)) * coeff;
}

std::optional<ExteriorForm> poincare_primitive(const ExteriorForm& a) {
  const auto& s = a.space;
  const int k = a.degree;
  if (k == 0) return std::nullopt;
  for (const auto& c : s.coords)
    if (c.kind != CoordKind::Affine) return std::nullopt;
  // cone operator on a star-shaped box about the origin: for each term
  // f dx_I, K = sum_a (-1)^{a-1} x_{i_a} (int_0^1 s^{k-1} f(sx) ds) dx_{I \ a}
  ExteriorForm K(s, k - 1);
  for (const auto& [mask, coeff] : a.terms) {
    if (!coeff.single_cell()) return std::nullopt;
    const Poly& f = coeff.only_poly();
    std::vector<uint32_t> idxs;
    for (uint32_t c = 0; c < s.dim(); ++c)
      if (mask_has(mask, c)) idxs.push_back(c);
    for (size_t apos = 0; apos < idxs.size(); ++apos) {
      Poly scaled;
      for (const auto& [m, cv] : f.terms) {
        unsigned D = 0;
        for (const auto& fac : m.factors) {
          if (fac.trig != Trig::None) return std::nullopt;
          D += fac.pow;
        }
        scaled.add_term(m, cv / Rational(D + k));
      }
      Poly term = scaled * Poly::coord(idxs[apos]);
      WedgeMask rest = mask & ~(WedgeMask(1) << idxs[apos]);
      Piecewise pc(s.dim(), (apos % 2 == 0) ? term : -term);
      K.add_term(rest, pc);
    }
  }
  if (!equal_forms(exterior_d(K), a)) return std::nullopt;
  return K;
}

VariationReport variational_delta(const InvariantMonomial& Q, const ExteriorForm& A0,
                                  const ExteriorForm& A1) {
  if (Q.degree == 0) throw std::invalid_argument("variational formula needs degree >= 1");
  const unsigned n = Q.degree - 1;
  const auto& s = A0.space;
  // extended space with the path parameter tau in front
  CoordinateSpace ext = product(make_space({affine_coord("tau", 0, 1)}), s);
  auto lift = [&](const ExteriorForm& f) {
    ExteriorForm r(ext, f.degree);
    for (const auto& [mask, c] : f.terms) r.add_term(mask << 1, embed_pw(c, 1, ext.dim()));
    return r;
  };
  ExteriorForm adot = A1 - A0;
  ExteriorForm Ft = lift(exterior_d(A0)) +
                    wedge(ExteriorForm::scalar(ext, Piecewise(ext.dim(), Poly::coord(0))),
                          lift(exterior_d(adot)));
  ExteriorForm integrand = wedge(lift(adot), wedge_pow(Ft, n));
  ExteriorForm integrated = integrate_coords_full(integrand, {0});

  VariationReport rep;
  ExteriorForm bulk(s, integrand.degree);
  for (const auto& [mask, c] : integrated.terms) {
    Piecewise down;
    down.cont = c.cont;
    down.breaks.assign(s.dim(), {});
    for (size_t cc = 0; cc < s.dim(); ++cc) down.breaks[cc] = c.breaks.at(cc + 1);
    for (const auto& [idx, poly] : c.cells) {
      std::vector<uint32_t> nidx(idx.begin() + 1, idx.end());
      down.cells[nidx] = reindex_poly(poly, -1);
    }
    bulk.add_term(mask >> 1, down);
  }
  rep.bulk = bulk * (Q.coeff * Rational(Q.degree));

  ExteriorForm diff = cs_transgression_abelian(A1, n, Q.coeff) -
                      cs_transgression_abelian(A0, n, Q.coeff) - rep.bulk;
  rep.difference_closed = zero_on(exterior_d(diff), Domain::whole(s));
  if (rep.difference_closed) {
    if (diff.is_zero()) {
      rep.exactness_witnessed = true;
    } else if (poincare_primitive(diff)) {
      rep.exactness_witnessed = true;
    } else {
      bool all_zero = true;
      for (const auto& [cs, val] : periods(diff).entries)
        if (val != 0) all_zero = false;
      rep.exactness_witnessed = all_zero;
    }
  }
  return rep;
}

ProductIdentityReport product_identity_check(const InvariantMonomial& Q1,
                                             const InvariantMonomial& Q2,
                                             const ExteriorForm& B) {
  ProductIdentityReport rep;
  InvariantMonomial Q12 = Q1 * Q2;
  ExteriorForm lhs = cs_transgression_abelian(B, Q12.degree - 1, Q12.coeff);
  ExteriorForm F = exterior_d(B);
  ExteriorForm rhs = (Q1.degree == 0)
                         ? cs_transgression_abelian(B, Q2.degree - 1, Q2.coeff) * Q1.coeff
                         : wedge(chern_weil_form(Q1, F),
                                 cs_transgression_abelian(B, Q2.degree - 1, Q2.coeff));
  ExteriorForm diff = lhs - rhs;
  rep.exact_equal = diff.is_zero() || zero_on(diff, Domain::whole(B.space));
  if (rep.exact_equal) {
    rep.up_to_exact = true;
    return rep;
  }
  if (!zero_on(exterior_d(diff), Domain::whole(B.space))) return rep;
  if (poincare_primitive(diff)) {
    rep.up_to_exact = true;
    return rep;
  }
  bool all_zero = true;
  for (const auto& [cs, val] : periods(diff).entries)
    if (val != 0) all_zero = false;
  rep.up_to_exact = all_zero;
  return rep;
}

GvReport gv_form(const ExteriorForm& beta, unsigned n) {
  GvReport rep;
  rep.form = cs_transgression_abelian(beta, n);
  ExteriorForm lhs = exterior_d(rep.form);
  ExteriorForm rhs = wedge_pow(exterior_d(beta), n + 1);
  rep.identity_ok = equal_forms(lhs, rhs);
  return rep;
}

// ---------------------------------------------------------------------------

LineBundleReport verify_line_bundle(const CoverContext& ctx, const LineBundleData& lb) {
  LineBundleReport rep;
  {
    CechCochain d = cech_delta(ctx, lb.phase);
    bool ok = true;
    for (const auto& t : ctx.nerve.level(2)) {
      if (is_degenerate(t)) continue;
      const ExteriorForm& v = d.at(t);
      if (v.is_zero()) continue;
      auto it = v.terms.find(0);
      if (it == v.terms.end() || v.terms.size() != 1) {
        ok = false;
        break;
      }
      Domain dom = ctx.domain(t);
      bool constant = true;
      for (uint32_t c = 0; c < ctx.space().dim(); ++c)
        if (!zero_on(derivative(it->second, c), ctx.space(), dom)) constant = false;
      if (!constant) {
        ok = false;
        break;
      }
      std::vector<Rational> pt;
      for (size_t c = 0; c < ctx.space().dim(); ++c) {
        std::vector<Interval> scratch;
        const auto& ivs = dom.intervals(c, ctx.space(), scratch);
        pt.push_back((ivs[0].lo + ivs[0].hi) / 2);
      }
      if (!is_integer(eval_exact(it->second, pt))) {
        ok = false;
        break;
      }
    }
    rep.lines.push_back({"transition cocycle", ok, ok ? 0.0 : 1.0, ""});
    rep.ok = rep.ok && ok;
  }
  {
    CechCochain dA = cech_delta(ctx, lb.connection);
    bool ok = true;
    for (const auto& t : ctx.nerve.level(1)) {
      if (is_degenerate(t)) continue;
      if (!equal_on(dA.at(t), exterior_d(lb.phase.at(t)), ctx.domain(t))) {
        ok = false;
        break;
      }
    }
    rep.lines.push_back({"connection compatibility", ok, ok ? 0.0 : 1.0, ""});
    rep.ok = rep.ok && ok;
  }
  return rep;
}

DeligneCocycle line_bundle_deligne(const CoverContext& ctx, const LineBundleData& lb) {
  auto rep = verify_line_bundle(ctx, lb);
  if (!rep.ok) throw std::domain_error("line bundle data violates the cocycle conditions");
  // with A_j - A_i = d(phase_ij), the cocycle condition delta omega^0 =
  // d omega^1 forces omega^1 = +phase and theta = -phase
  DeligneCocycle dc;
  dc.level = 1;
  dc.omega.push_back(lb.connection);
  dc.omega.push_back(lb.phase);
  dc.theta = lb.phase;
  for (auto& [t, v] : dc.theta.values) v = v * Rational(-1);
  return dc;
}

LineBundleData tensor_power(const LineBundleData& lb, const Integer& k) {
  LineBundleData r = lb;
  for (auto& [t, v] : r.connection.values) v = v * Rational(k);
  for (auto& [t, v] : r.phase.values) v = v * Rational(k);
  return r;
}

Piecewise circle_branch(const CoverContext& ctx, uint32_t coord, const Domain& arc_domain,
                        const std::vector<Rational>& grid) {
  const auto& s = ctx.space();
  const auto& ivs = arc_domain.per_coord.at(coord);
  Rational start, len = 0;
  if (ivs.size() == 1) {
    start = ivs[0].lo;
    len = ivs[0].hi - ivs[0].lo;
  } else {
    start = ivs[1].lo - 1;  // wrapped arc
    len = (ivs[0].hi - ivs[0].lo) + (ivs[1].hi - ivs[1].lo);
  }
  Piecewise out;
  out.breaks.assign(s.dim(), {});
  out.breaks[coord] = grid;
  out.cont = Cont::Smooth;
  for (uint32_t ci = 0; ci <= grid.size(); ++ci) {
    Rational lo = (ci == 0) ? Rational(0) : grid[ci - 1];
    Rational hi = (ci == grid.size()) ? Rational(1) : grid[ci];
    Rational mid = (lo + hi) / 2;
    Rational d = mod1(mid - start);
    if (!(d < len)) continue;  // outside the arc
    Rational k = Rational(rfloor(mid - start));
    std::vector<uint32_t> idx(s.dim(), 0);
    idx[coord] = ci;
    out.cells[idx] = Poly::coord(coord) - Poly(k);
  }
  return out;
}

LineBundleData dual_torus_line_bundle(const ProductFibrationCover& pf) {
  const CoverContext& ctx = pf.total;
  const auto& s = ctx.space();
  if (pf.m() != 1 || pf.base.space().dim() != 1)
    throw std::invalid_argument("dual-torus bundle needs circle fibre and circle base");
  const uint32_t xcoord = 0, xicoord = 1;
  const size_t nfib = pf.fibre.cover.size();
  const size_t nbase = pf.base.cover.size();

  auto endpoint_grid = [&](const CoverContext& c) {
    std::vector<Rational> g;
    for (const auto& el : c.cover.elements)
      for (const auto& iv : el.per_coord.at(0)) {
        if (iv.lo > 0 && iv.lo < 1) g.push_back(iv.lo);
        if (iv.hi > 0 && iv.hi < 1) g.push_back(iv.hi);
      }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  };
  std::vector<Rational> xgrid = endpoint_grid(pf.fibre);
  std::vector<Rational> xigrid = endpoint_grid(pf.base);

  std::vector<Piecewise> xi_branch, x_branch;
  for (size_t i = 0; i < nbase; ++i) {
    Domain d = Domain::whole(s);
    d.per_coord[xicoord] = pf.base.cover.elements[i].per_coord.at(0);
    xi_branch.push_back(circle_branch(ctx, xicoord, d, xigrid));
  }
  for (size_t j = 0; j < nfib; ++j) {
    Domain d = Domain::whole(s);
    d.per_coord[xcoord] = pf.fibre.cover.elements[j].per_coord.at(0);
    x_branch.push_back(circle_branch(ctx, xcoord, d, xgrid));
  }

  LineBundleData lb;
  lb.connection = zero_cochain(ctx, 0, 1);
  lb.phase = zero_cochain(ctx, 1, 0);
  for (auto& [t, v] : lb.connection.values) {
    uint32_t i = t[0] / static_cast<uint32_t>(nfib);
    ExteriorForm A(s, 1);
    A.add_term(WedgeMask(1) << xcoord, xi_branch[i]);
    v = A;
  }
  for (auto& [t, v] : lb.phase.values) {
    if (is_degenerate(t)) continue;
    uint32_t i0 = t[0] / static_cast<uint32_t>(nfib);
    uint32_t i1 = t[1] / static_cast<uint32_t>(nfib), j1 = t[1] % static_cast<uint32_t>(nfib);
    // winding of the base branch jump on the overlap, a constant integer
    Domain dom = ctx.domain(t);
    std::vector<Rational> pt;
    for (size_t c = 0; c < s.dim(); ++c) {
      std::vector<Interval> scratch;
      const auto& ivs = dom.intervals(c, s, scratch);
      pt.push_back((ivs[0].lo + ivs[0].hi) / 2);
    }
    Rational w = eval_exact(xi_branch[i1], pt) - eval_exact(xi_branch[i0], pt);
    if (!is_integer(w)) throw std::domain_error("branch jump is not an integer");
    if (w == 0) continue;
    v = ExteriorForm::scalar(s, x_branch[j1] * w);
  }
  return lb;
}

}  // namespace gerbes
