#include "gerbes/deligne.hpp"

namespace gerbes {

namespace {

// interior rational point of a tuple domain
std::vector<Rational> interior_point(const CoverContext& ctx, const Domain& d) {
  const auto& s = ctx.space();
  std::vector<Rational> x(s.dim());
  for (size_t c = 0; c < s.dim(); ++c) {
    std::vector<Interval> scratch;
    const auto& ivs = d.intervals(c, s, scratch);
    x[c] = (ivs[0].lo + ivs[0].hi) / 2;
  }
  return x;
}

// Is the 0-form v equal to a constant on the domain?  Returns it.  Constancy
// is decided by vanishing coordinate derivatives (restricted to the domain),
// which keeps the final evaluation on constant pieces only.
std::optional<Rational> constant_value_on(const CoverContext& ctx, const ExteriorForm& v,
                                          const Domain& dom) {
  if (v.is_zero()) return Rational(0);
  auto it = v.terms.find(0);
  if (v.terms.size() > 1 || it == v.terms.end()) return std::nullopt;
  for (uint32_t c = 0; c < v.space.dim(); ++c)
    if (!zero_on(derivative(it->second, c), v.space, dom)) return std::nullopt;
  Rational c = eval_exact(it->second, interior_point(ctx, dom));
  ExteriorForm cf = ExteriorForm::scalar(v.space, Piecewise(v.space.dim(), Poly(c)));
  if (!equal_on(v, cf, dom)) return std::nullopt;
  return c;
}

}  // namespace

DeligneCocycle global_form_cocycle(const CoverContext& ctx, const ExteriorForm& w) {
  DeligneCocycle dc;
  dc.level = w.degree;
  dc.omega.push_back(epsilon_star(ctx, w));
  for (int nu = 1; nu <= dc.level; ++nu)
    dc.omega.push_back(zero_cochain(ctx, nu, dc.level - nu));
  dc.theta = zero_cochain(ctx, dc.level, 0);
  return dc;
}

DeligneReport verify_deligne(const CoverContext& ctx, const DeligneCocycle& dc) {
  DeligneReport rep;
  const int ell = dc.level;
  if (static_cast<int>(dc.omega.size()) != ell + 1) {
    rep.add("shape", false, "omega sequence length mismatch");
    return rep;
  }
  for (int nu = 0; nu <= ell; ++nu) {
    if (dc.omega[nu].p != nu || dc.omega[nu].q != ell - nu) {
      rep.add("shape", false, "bidegree mismatch at nu=" + std::to_string(nu));
      return rep;
    }
  }

  // delta omega^{nu-1} + (-1)^nu d omega^nu = 0 for nu = 1..ell
  for (int nu = 1; nu <= ell; ++nu) {
    CechCochain lhs = cech_delta(ctx, dc.omega[nu - 1]);
    CechCochain dnu = cochain_d(dc.omega[nu]);
    bool ok = true;
    for (const auto& t : ctx.nerve.level(nu)) {
      if (is_degenerate(t)) continue;
      ExteriorForm v = (nu % 2 == 0) ? lhs.at(t) + dnu.at(t) : lhs.at(t) - dnu.at(t);
      if (!zero_on(v, ctx.domain(t))) {
        ok = false;
        break;
      }
    }
    rep.add("cocycle condition nu=" + std::to_string(nu), ok);
  }

  // omega^ell = -theta mod Z
  {
    bool ok = true;
    for (const auto& t : ctx.nerve.level(ell)) {
      if (is_degenerate(t)) continue;
      auto c = constant_value_on(ctx, dc.omega[ell].at(t) + dc.theta.at(t), ctx.domain(t));
      if (!c || !is_integer(*c)) {
        ok = false;
        break;
      }
    }
    rep.add("theta lift", ok);
  }

  // delta omega^ell integral
  {
    bool ok = true;
    CechCochain del = cech_delta(ctx, dc.omega[ell]);
    for (const auto& t : ctx.nerve.level(ell + 1)) {
      if (is_degenerate(t)) continue;
      auto c = constant_value_on(ctx, del.at(t), ctx.domain(t));
      if (!c || !is_integer(*c)) {
        ok = false;
        break;
      }
    }
    rep.add("integrality of delta omega^ell", ok);
  }

  // d omega^0 is a global closed form
  {
    CechCochain d0 = cochain_d(dc.omega[0]);
    bool ok = cochain_zero(ctx, cech_delta(ctx, d0));
    rep.add("delta d omega^0 = 0", ok);
    auto glued = glue_global(ctx, d0);
    if (glued) {
      rep.add("curvature glues", true);
      rep.add("curvature closed", zero_on(exterior_d(*glued), Domain::whole(ctx.space())));
      rep.curvature = std::move(glued);
    } else {
      rep.add("curvature glues", false);
    }
  }
  return rep;
}

ExteriorForm curvature(const CoverContext& ctx, const DeligneCocycle& dc) {
  auto glued = glue_global(ctx, cochain_d(dc.omega[0]));
  if (!glued) throw std::domain_error("not a cocycle: d omega^0 has no global representative");
  return *glued;
}

bool is_flat(const CoverContext& ctx, const DeligneCocycle& dc) {
  return zero_on(curvature(ctx, dc), Domain::whole(ctx.space()));
}

IntegralCechCocycle bockstein_class(const CoverContext& ctx, const DeligneCocycle& dc) {
  const int ell = dc.level;
  IntegralCechCocycle z{ell + 1, {}};
  CechCochain del = cech_delta(ctx, dc.omega[ell]);
  for (const auto& t : ctx.nerve.level(ell + 1)) {
    auto c = constant_value_on(ctx, del.at(t), ctx.domain(t));
    if (!c || !is_integer(*c))
      throw std::domain_error("integrality violation in delta omega^ell");
    z.values.emplace(t, -to_integer(*c));
  }
  // closedness of z when the nerve carries one more level
  if (ctx.nerve.max_level() >= static_cast<size_t>(ell + 2)) {
    for (const auto& t : ctx.nerve.level(ell + 2)) {
      Integer s = 0;
      for (size_t nu = 0; nu < t.size(); ++nu) {
        Integer v = z.values.at(face(t, nu));
        s += (nu % 2 == 0) ? v : -v;
      }
      if (s != 0) throw std::domain_error("Bockstein cocycle is not closed");
    }
  }
  return z;
}

DeligneCocycle apply_equivalence(const CoverContext& ctx, const DeligneCocycle& dc,
                                 const std::vector<CechCochain>& witness) {
  const int ell = dc.level;
  if (static_cast<int>(witness.size()) != ell)
    throw std::invalid_argument("witness must have ell components");
  DeligneCocycle r = dc;
  for (int nu = 0; nu <= ell; ++nu) {
    CechCochain add = zero_cochain(ctx, nu, ell - nu);
    if (nu >= 1) {
      CechCochain db = cech_delta(ctx, witness[nu - 1]);
      for (auto& [t, v] : add.values) v = v + db.at(t);
    }
    if (nu < ell) {
      CechCochain dv = cochain_d(witness[nu]);
      for (auto& [t, v] : add.values)
        v = (nu % 2 == 0) ? v + dv.at(t) : v - dv.at(t);
    }
    for (auto& [t, v] : r.omega[nu].values) v = v + add.at(t);
  }
  // keep the lift convention theta = -omega^ell up to the original integers
  if (ell >= 1) {
    CechCochain db = cech_delta(ctx, witness[ell - 1]);
    for (auto& [t, v] : r.theta.values) v = v - db.at(t);
  }
  return r;
}

PeriodTable periods(const ExteriorForm& a) {
  if (!zero_on(exterior_d(a), Domain::whole(a.space)))
    throw std::domain_error("periods of a non-closed form");
  PeriodTable table;
  std::vector<uint32_t> per;
  for (uint32_t c = 0; c < a.space.dim(); ++c)
    if (a.space.at(c).kind == CoordKind::Periodic) per.push_back(c);
  const int k = a.degree;
  if (k == 0 || k > static_cast<int>(per.size())) return table;
  std::vector<uint32_t> pick(k, 0);
  std::function<void(size_t, size_t)> rec = [&](size_t pos, size_t start) {
    if (pos == static_cast<size_t>(k)) {
      WedgeMask smask = 0;
      for (uint32_t c : pick) smask |= WedgeMask(1) << c;
      Rational total = 0;
      for (const auto& [mask, coeff] : a.terms) {
        if (mask != smask) continue;
        Piecewise c = coeff;
        for (uint32_t u = 0; u < a.space.dim(); ++u)
          if (!mask_has(smask, u) && c.depends_on(u)) c = substitute_const(c, u, 0);
        for (uint32_t u : pick) c = integrate_full(c, a.space, u);
        total += eval_exact(c, std::vector<Rational>(a.space.dim(), 0));
      }
      table.entries.push_back({pick, total});
      return;
    }
    for (size_t i = start; i < per.size(); ++i) {
      pick[pos] = per[i];
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return table;
}

Rational holonomy_circle_factor(const CoverContext& ctx, const DeligneCocycle& dc,
                                uint32_t factor_coord) {
  if (dc.level != 1) throw std::invalid_argument("holonomy implemented for level-1 cocycles");
  const auto& s = ctx.space();
  // elements containing the basepoint 0 in every other coordinate, arranged
  // around the factor circle by their arc
  struct ArcEl {
    uint32_t element;
    Rational lo, hi;  // lifted arc
  };
  std::vector<ArcEl> arcs;
  for (uint32_t e = 0; e < ctx.cover.size(); ++e) {
    const Domain& d = ctx.cover.elements[e];
    bool base_ok = true;
    for (uint32_t c = 0; c < s.dim() && base_ok; ++c) {
      if (c == factor_coord) continue;
      std::vector<Interval> scratch;
      bool hit = false;
      for (const auto& iv : d.intervals(c, s, scratch))
        if (!(0 < iv.lo) && 0 < iv.hi) hit = true;  // closed at lo, open at hi
      base_ok = hit;
    }
    if (!base_ok) continue;
    std::vector<Interval> scratch;
    const auto& ivs = d.intervals(factor_coord, s, scratch);
    // lift a possibly wrapped arc to the line
    Rational lo, hi;
    if (ivs.size() == 1) {
      lo = ivs[0].lo;
      hi = ivs[0].hi;
    } else {
      lo = ivs[1].lo - 1;  // wrapped arc: (lo-1, hi0)
      hi = ivs[0].hi;
    }
    // skip duplicates covering the same arc (multiple base elements at 0)
    bool dup = false;
    for (const auto& a : arcs)
      if (a.lo == lo && a.hi == hi) dup = true;
    if (!dup) arcs.push_back({e, lo, hi});
  }
  std::sort(arcs.begin(), arcs.end(), [](const ArcEl& a, const ArcEl& b) { return a.lo < b.lo; });
  const size_t n = arcs.size();
  if (n < 3) throw std::domain_error("holonomy: factor is not covered by >= 3 arcs at basepoint");

  // sample point p_j in the overlap of arcs j-1 and j (lifted coordinates)
  std::vector<Rational> p(n + 1);
  for (size_t j = 1; j < n; ++j) p[j] = (arcs[j].lo + arcs[j - 1].hi) / 2;
  p[0] = (arcs[0].lo + (arcs[n - 1].hi - 1)) / 2;
  p[n] = p[0] + 1;

  auto restrict_factor = [&](const ExteriorForm& w) {
    // coefficient of d(factor) with the other coordinates pinned to 0
    WedgeMask fmask = WedgeMask(1) << factor_coord;
    Piecewise out(s.dim(), Poly());
    for (const auto& [mask, coeff] : w.terms) {
      if (mask != fmask) continue;
      Piecewise c = coeff;
      for (uint32_t u = 0; u < s.dim(); ++u)
        if (u != factor_coord && c.depends_on(u)) c = substitute_const(c, u, 0);
      out = out + c;
    }
    return out;
  };

  Rational hol = 0;
  for (size_t j = 0; j < n; ++j) {
    // segment p_j .. p_{j+1} inside arcs[j], possibly wrapping mod 1
    Piecewise g = restrict_factor(dc.omega[0].at(Tuple{arcs[j].element}));
    Rational a = mod1(p[j]);
    Rational len = p[j + 1] - p[j];
    Rational b = a + len;
    if (b <= 1) {
      Piecewise iv = integrate_coord(g, s, factor_coord, a, b);
      hol += eval_exact(iv, std::vector<Rational>(s.dim(), 0));
    } else {
      Piecewise iv1 = integrate_coord(g, s, factor_coord, a, 1);
      Piecewise iv2 = integrate_coord(g, s, factor_coord, 0, b - 1);
      hol += eval_exact(iv1, std::vector<Rational>(s.dim(), 0)) +
             eval_exact(iv2, std::vector<Rational>(s.dim(), 0));
    }
    // vertex term at p_j: transition from arcs[j-1] to arcs[j]
    uint32_t eprev = arcs[(j + n - 1) % n].element;
    uint32_t ecur = arcs[j].element;
    Tuple t{std::min(eprev, ecur), std::max(eprev, ecur)};
    Rational sign = (eprev <= ecur) ? 1 : -1;
    const ExteriorForm& w1 = dc.omega[1].at(t);
    std::vector<Rational> pt(s.dim(), 0);
    pt[factor_coord] = mod1(p[j]);
    Rational v = 0;
    auto it = w1.terms.find(0);
    if (it != w1.terms.end()) v = eval_exact(it->second, pt);
    hol += sign * v;
  }
  return mod1(hol);
}

}  // namespace gerbes
