#include "gerbes/family.hpp"

namespace gerbes {

ChartFamily flat_torus_family(unsigned k, const Rational& halfwidth) {
  std::vector<Coordinate> cs;
  for (unsigned j = 1; j <= k; ++j) cs.push_back(periodic_coord("x" + std::to_string(j)));
  for (unsigned j = 1; j <= k; ++j)
    cs.push_back(affine_coord("z" + std::to_string(j), -halfwidth, halfwidth));
  ChartFamily fam;
  fam.yspace = make_space(cs);
  fam.fibre_dim = k;
  fam.Q = InvariantMonomial{k, 1};
  ExteriorForm B(fam.yspace, 1);
  for (unsigned j = 0; j < k; ++j)
    B = B + wedge(ExteriorForm::scalar(fam.yspace, Piecewise(fam.yspace.dim(), Poly::coord(k + j))),
                  ExteriorForm::d_coord(fam.yspace, j));
  fam.B = B;
  return fam;
}

namespace {

// the pure-fibre component of a form
ExteriorForm fibre_component(const ExteriorForm& a, unsigned m) {
  ExteriorForm r(a.space, a.degree);
  WedgeMask fmask = (WedgeMask(1) << m) - 1;
  for (const auto& [mask, c] : a.terms)
    if ((mask & ~fmask) == 0) r.add_term(mask, c);
  return r;
}

std::vector<uint32_t> fibre_coords(unsigned m) {
  std::vector<uint32_t> r;
  for (unsigned c = 0; c < m; ++c) r.push_back(c);
  return r;
}

// drop the leading fibre block from a fibre-independent form
ExteriorForm drop_fibre_block(const ExteriorForm& a, unsigned m) {
  CoordinateSpace base;
  base.coords.assign(a.space.coords.begin() + m, a.space.coords.end());
  ExteriorForm r(base, a.degree);
  for (const auto& [mask, c] : a.terms) {
    if (mask & ((WedgeMask(1) << m) - 1))
      throw std::domain_error("fibre differentials remain after integration");
    Piecewise down;
    down.cont = c.cont;
    down.breaks.assign(base.dim(), {});
    for (size_t cc = 0; cc < base.dim(); ++cc) down.breaks[cc] = c.breaks.at(cc + m);
    for (const auto& [idx, poly] : c.cells) {
      for (unsigned cc = 0; cc < m; ++cc)
        if (poly.depends_on(cc)) throw std::domain_error("fibre dependence remains");
      std::vector<uint32_t> nidx(idx.begin() + m, idx.end());
      down.cells[nidx] = reindex_poly(poly, -static_cast<int>(m));
    }
    r.add_term(mask >> m, down);
  }
  return r;
}

// staircase backend: covers from the family's chart data
ProductFibrationCover family_fibration(const ChartFamily& fam) {
  const unsigned k = fam.fibre_dim;
  std::optional<GoodCover> fcov;
  std::optional<PartitionOfUnity> fpou;
  for (unsigned j = 0; j < k; ++j) {
    auto cc = build_circle_cover(3, Rational(1, 24), PouKind::C1Cubic, fam.yspace.at(j).name);
    if (!fcov) {
      fcov = cc.cover;
      fpou = cc.pou;
    } else {
      auto pou = product_pou(*fcov, *fpou, cc.cover, cc.pou);
      fcov = product_cover(*fcov, cc.cover);
      fpou = pou;
    }
  }
  std::vector<Coordinate> zc(fam.yspace.coords.begin() + k, fam.yspace.coords.end());
  CoordinateSpace zspace = make_space(zc);
  GoodCover base{ManifoldModel{zspace}, {Domain::whole(zspace)}, "box1"};
  size_t qmax = (1u << k) - 1;  // largest active set of the product bumps, minus one
  return make_product_fibration(*fcov, *fpou, base, k + 1, 2, qmax + 1);
}

}  // namespace

FibreConditionReport verify_fibre_condition(const ChartFamily& fam) {
  FibreConditionReport rep;
  ExteriorForm F = exterior_d(fam.B);
  rep.fibre_curvature = fibre_component(F, fam.fibre_dim);
  ExteriorForm powr = wedge_pow(rep.fibre_curvature, fam.nilpotency);
  rep.ok = zero_on(powr, Domain::whole(fam.yspace));
  return rep;
}

FamilyInvariant lambda_family(const ChartFamily& fam, FamilyBackend backend) {
  if (!verify_fibre_condition(fam).ok)
    throw std::domain_error("declared fibre condition fails for the family datum");
  FamilyInvariant inv;
  inv.ell = fam.ell();
  ExteriorForm lambda = cs_transgression_abelian(fam.B, fam.n(), fam.Q.coeff);
  switch (backend) {
    case FamilyBackend::ChartClassical: {
      inv.backend = "chart-classical";
      inv.rep = drop_fibre_block(integrate_periodic(lambda, fibre_coords(fam.fibre_dim)),
                                 fam.fibre_dim);
      break;
    }
    case FamilyBackend::ChartStaircase: {
      inv.backend = "chart-staircase";
      auto pf = family_fibration(fam);
      auto lift = eps_star_simplicial(pf.total, lambda, pf.total.nerve.max_level());
      auto comps = fibre_integrate_cech(pf, lift, 0);
      auto glued = glue_global(pf.base, comps.at(0));
      if (!glued) throw std::domain_error("staircase output failed to glue");
      inv.rep = *glued;
      break;
    }
    case FamilyBackend::Formal: {
      inv.backend = "formal";
      auto model = torus_model_formal(fam.fibre_dim);
      std::vector<Coordinate> zc(fam.yspace.coords.begin() + fam.fibre_dim,
                                 fam.yspace.coords.end());
      auto base = make_space(zc);
      FormalFamily ff{formal_zero(model, base)};
      for (unsigned j = 0; j < fam.fibre_dim; ++j) {
        auto it = fam.B.terms.find(WedgeMask(1) << j);
        if (it == fam.B.terms.end()) continue;
        Piecewise down;
        down.cont = it->second.cont;
        down.breaks.assign(base.dim(), {});
        for (size_t cc = 0; cc < base.dim(); ++cc)
          down.breaks[cc] = it->second.breaks.at(cc + fam.fibre_dim);
        for (const auto& [idx, poly] : it->second.cells) {
          std::vector<uint32_t> nidx(idx.begin() + fam.fibre_dim, idx.end());
          down.cells[nidx] = reindex_poly(poly, -static_cast<int>(fam.fibre_dim));
        }
        ExteriorForm f(base, 0);
        f.add_term(0, down);
        ff.B.comps[1 + j] = f;
      }
      auto formal_inv = formal_family_connection(ff, fam.n());
      inv.rep = formal_inv.lambda * fam.Q.coeff;
      break;
    }
  }
  return inv;
}

CurvatureCheck curvature_check(const ChartFamily& fam, const FamilyInvariant& inv) {
  CurvatureCheck chk;
  ExteriorForm top = chern_weil_form(fam.Q, exterior_d(fam.B));
  chk.fibre_integral_side =
      drop_fibre_block(integrate_periodic(top, fibre_coords(fam.fibre_dim)), fam.fibre_dim);
  Rational sign = (inv.ell % 2 == 1) ? 1 : -1;  // (-1)^{ell-1}
  chk.d_lambda_side = exterior_d(inv.rep) * sign;
  chk.ok = equal_forms(chk.fibre_integral_side, chk.d_lambda_side);
  return chk;
}

ExtensionReport extension_independence(const ChartFamily& fam, const ExteriorForm& B1,
                                       bool allow_mismatch) {
  ExtensionReport rep;
  ExteriorForm diffB = B1 - fam.B;
  rep.fibre_parts_equal = fibre_component(diffB, fam.fibre_dim).is_zero();
  // hypothesis of the independence statement: F_fibre^{n+1-ell} = 0
  int need = static_cast<int>(fam.n()) + 1 - fam.ell();
  ChartFamily fam1 = fam;
  fam1.B = B1;
  fam1.nilpotency = static_cast<unsigned>(std::max(1, need));
  ChartFamily fam0 = fam;
  fam0.nilpotency = static_cast<unsigned>(std::max(1, need));
  rep.hypothesis_ok = verify_fibre_condition(fam0).ok && verify_fibre_condition(fam1).ok;
  if (!rep.fibre_parts_equal && !allow_mismatch)
    throw std::invalid_argument("extensions restrict to different fibre families");

  FamilyInvariant i0 = lambda_family(fam, FamilyBackend::ChartClassical);
  ExteriorForm lambda1 = cs_transgression_abelian(B1, fam.n(), fam.Q.coeff);
  ExteriorForm rep1 =
      drop_fibre_block(integrate_periodic(lambda1, fibre_coords(fam.fibre_dim)), fam.fibre_dim);
  ExteriorForm diff = rep1 - i0.rep;
  rep.difference_form_zero = zero_on(diff, Domain::whole(diff.space));
  bool closed = zero_on(exterior_d(diff), Domain::whole(diff.space));
  bool witnessed = false;
  if (closed) {
    if (diff.is_zero()) {
      witnessed = true;
    } else if (poincare_primitive(diff)) {
      witnessed = true;
    } else {
      witnessed = true;
      for (const auto& [cs, val] : periods(diff).entries)
        if (val != 0) witnessed = false;
    }
  }
  rep.difference_trivial = closed && witnessed;
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

// spherical substitution for the unit sphere in R^k, quarter-turn angles
Substitution sphere_substitution(const CoordinateSpace& zspace, unsigned k,
                                 CoordinateSpace& probe_out) {
  std::vector<Coordinate> pc;
  for (unsigned a = 0; a + 2 < k; ++a)
    pc.push_back(affine_coord("psi" + std::to_string(a + 1), 0, Rational(1, 2)));
  pc.push_back(periodic_coord("phi"));
  probe_out = make_space(pc);
  Substitution sub{zspace, probe_out, {}};
  sub.map.assign(zspace.dim(), Piecewise(probe_out.dim(), Poly()));
  // z_1 = cos(a_1), z_2 = sin(a_1) cos(a_2), ..., z_k = sin(a_1)..sin(a_{k-1})
  // with angles a_1..a_{k-1} the probe coordinates in order
  Poly run(Rational(1));
  for (unsigned j = 0; j < k; ++j) {
    if (j + 1 < k) {
      uint32_t ang = j;
      sub.set_poly(j, run * Poly::trig(ang, Trig::Cos, 1));
      run = run * Poly::trig(ang, Trig::Sin, 1);
    } else {
      sub.set_poly(j, run);
    }
  }
  return sub;
}

}  // namespace

ProbeResult sphere_probe(const FamilyInvariant& inv) {
  ProbeResult res;
  const auto& zs = inv.rep.space;
  const unsigned k = static_cast<unsigned>(zs.dim());
  if (k < 2 || k > 4) throw std::invalid_argument("sphere probe supports k = 2, 3, 4");
  CoordinateSpace probe;
  Substitution sub = sphere_substitution(zs, k, probe);
  res.restricted = pullback(sub, inv.rep);
  res.closed = zero_on(exterior_d(res.restricted), Domain::whole(probe));
  std::vector<uint32_t> all;
  for (uint32_t c = 0; c < probe.dim(); ++c) all.push_back(c);
  ExteriorForm integrated = integrate_coords_full(res.restricted, all);
  Rational val = 0;
  if (!integrated.is_zero()) {
    auto it = integrated.terms.find(0);
    if (it != integrated.terms.end())
      val = eval_exact(it->second, std::vector<Rational>(probe.dim(), 0));
  }
  res.periods.push_back({"fundamental", val});
  return res;
}

ProbeResult torus_probe(const FamilyInvariant& inv,
                        const std::vector<std::pair<uint32_t, uint32_t>>& pairs) {
  ProbeResult res;
  const auto& zs = inv.rep.space;
  std::vector<Coordinate> pc;
  for (size_t a = 0; a < pairs.size(); ++a)
    pc.push_back(periodic_coord("theta" + std::to_string(a + 1)));
  CoordinateSpace probe = make_space(pc);
  Substitution sub{zs, probe, {}};
  sub.map.assign(zs.dim(), Piecewise(probe.dim(), Poly()));
  for (size_t a = 0; a < pairs.size(); ++a) {
    sub.set_poly(pairs[a].first, Poly::trig(static_cast<uint32_t>(a), Trig::Cos, 1));
    sub.set_poly(pairs[a].second, Poly::trig(static_cast<uint32_t>(a), Trig::Sin, 1));
  }
  res.restricted = pullback(sub, inv.rep);
  res.closed = zero_on(exterior_d(res.restricted), Domain::whole(probe));
  for (const auto& [coords, val] : periods(res.restricted).entries) {
    std::string name = "cycle";
    for (uint32_t c : coords) name += "_" + probe.at(c).name;
    res.periods.push_back({name, val});
  }
  return res;
}

ExteriorForm covering_pullback(const ExteriorForm& a, int64_t degree) {
  Substitution sub{a.space, a.space, {}};
  sub.map.assign(a.space.dim(), Piecewise(a.space.dim(), Poly()));
  for (uint32_t c = 0; c < a.space.dim(); ++c) {
    if (a.space.at(c).kind == CoordKind::Periodic)
      sub.set_poly(c, Poly::coord(c) * Rational(degree));
    else
      sub.set_poly(c, Poly::coord(c));
  }
  return pullback(sub, a);
}

// ---------------------------------------------------------------------------

CaseIIFamily dual_torus_family(PouKind pou, unsigned arcs) {
  auto fib = build_circle_cover(arcs, Rational(1, 8 * arcs), pou, "x");
  auto base = build_circle_cover(arcs, Rational(1, 8 * arcs), PouKind::C1Cubic, "xi");
  auto pf = make_product_fibration(fib.cover, fib.pou, base.cover, 2, 3, 4);
  auto lb = dual_torus_line_bundle(pf);
  return CaseIIFamily{std::move(pf), std::move(lb)};
}

CaseIIInvariant lambda_family_case2(const CaseIIFamily& fam) {
  CaseIIInvariant inv;
  auto dc = line_bundle_deligne(fam.pf.total, fam.lb);
  inv.dc = deligne_pushforward(fam.pf, dc, 2);
  auto rep = verify_deligne(fam.pf.base, inv.dc);
  inv.verified = rep.ok;
  inv.curvature = curvature(fam.pf.base, inv.dc);

  auto z = bockstein_class(fam.pf.base, inv.dc);
  auto cyc = circle_fundamental_cycle(static_cast<unsigned>(fam.pf.base.cover.size()));
  inv.bockstein_pairing = pair_cocycle_chain(z, cyc);

  ExteriorForm F = curvature(fam.pf.total, dc);
  ExteriorForm classical = classical_fibre_integral(fam.pf, F);
  if (equal_forms(inv.curvature, classical))
    inv.curvature_sign = 1;
  else if (equal_forms(inv.curvature, classical * Rational(-1)))
    inv.curvature_sign = -1;
  return inv;
}

// ---------------------------------------------------------------------------

RigidityReport rigidity_probe(const ChartFamily& fam, const Deformation& def,
                              const std::vector<Rational>& taus) {
  RigidityReport rep;
  std::optional<std::vector<Rational>> first;
  for (const auto& tau : taus) {
    ChartFamily f = fam;
    f.B = fam.B + def.direction * tau;
    auto inv = lambda_family(f, FamilyBackend::ChartClassical);
    auto probe = sphere_probe(inv);
    if (!probe.closed) rep.constant = false;
    std::vector<Rational> vals;
    for (const auto& [name, v] : probe.periods) vals.push_back(v);
    rep.samples.push_back({tau, vals});
    if (!first)
      first = vals;
    else if (*first != vals)
      rep.constant = false;
  }
  return rep;
}

}  // namespace gerbes
