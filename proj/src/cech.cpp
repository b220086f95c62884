#include "gerbes/cech.hpp"

namespace gerbes {

CechCochain zero_cochain(const CoverContext& ctx, int p, int q) {
  CechCochain c{p, q, {}};
  for (const auto& t : ctx.nerve.level(p))
    c.values.emplace(t, ExteriorForm::zero(ctx.space(), q));
  return c;
}

CechCochain cech_delta(const CoverContext& ctx, const CechCochain& c) {
  CechCochain r{c.p + 1, c.q, {}};
  for (const auto& t : ctx.nerve.level(c.p + 1)) {
    ExteriorForm v = ExteriorForm::zero(ctx.space(), c.q);
    for (size_t nu = 0; nu < t.size(); ++nu) {
      const ExteriorForm& f = c.at(face(t, nu));
      v = (nu % 2 == 0) ? v + f : v - f;
    }
    r.values.emplace(t, std::move(v));
  }
  return r;
}

CechCochain cochain_d(const CechCochain& c) {
  CechCochain r{c.p, c.q + 1, {}};
  for (const auto& [t, v] : c.values) r.values.emplace(t, exterior_d(v));
  return r;
}

TotalD total_D(const CoverContext& ctx, const CechCochain& c) {
  TotalD r{cech_delta(ctx, c), cochain_d(c)};
  if (c.p % 2 == 1)
    for (auto& [t, v] : r.d_part.values) v = v * Rational(-1);
  return r;
}

CechCochain epsilon_star(const CoverContext& ctx, const ExteriorForm& a) {
  CechCochain c{0, a.degree, {}};
  for (const auto& t : ctx.nerve.level(0)) c.values.emplace(t, a);
  return c;
}

std::optional<ExteriorForm> glue_global(const CoverContext& ctx, const CechCochain& c) {
  if (c.p != 0) throw std::invalid_argument("glue_global expects a (0,q) cochain");
  // candidate: the first element's value; verify against all elements on
  // their own domains (values are ambient expressions)
  const ExteriorForm& cand = c.at(Tuple{0});
  bool ok = true;
  for (const auto& t : ctx.nerve.level(0)) {
    if (!equal_on(cand, c.at(t), ctx.domain(t))) {
      ok = false;
      break;
    }
  }
  if (ok) return cand;

  // stitch cellwise: refine a global grid from all values and element bounds,
  // take each cell's value from some element containing it
  const auto& s = ctx.space();
  std::vector<std::vector<Rational>> grid(s.dim());
  auto add_breaks = [&](const Piecewise& p) {
    for (size_t cc = 0; cc < s.dim(); ++cc)
      for (const auto& b : p.breaks[cc]) grid[cc].push_back(b);
  };
  for (const auto& [t, v] : c.values)
    for (const auto& [m, coeff] : v.terms) add_breaks(coeff);
  for (const auto& el : ctx.cover.elements)
    for (size_t cc = 0; cc < s.dim(); ++cc) {
      std::vector<Interval> scratch;
      for (const auto& iv : el.intervals(cc, s, scratch)) {
        if (s.at(cc).lo < iv.lo && iv.lo < s.at(cc).hi) grid[cc].push_back(iv.lo);
        if (s.at(cc).lo < iv.hi && iv.hi < s.at(cc).hi) grid[cc].push_back(iv.hi);
      }
    }
  for (auto& g : grid) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }

  int deg = c.q;
  ExteriorForm glued(s, deg);
  std::map<WedgeMask, Piecewise> acc;
  bool fail = false;
  detail::for_each_cell(grid, [&](const std::vector<uint32_t>& idx) {
    if (fail) return;
    // cell box and midpoint
    Domain celldom = Domain::whole(s);
    std::vector<Rational> mid(s.dim());
    for (size_t cc = 0; cc < s.dim(); ++cc) {
      Rational lo = (idx[cc] == 0) ? s.at(cc).lo : grid[cc][idx[cc] - 1];
      Rational hi = (idx[cc] == grid[cc].size()) ? s.at(cc).hi : grid[cc][idx[cc]];
      celldom.per_coord[cc] = {Interval{lo, hi}};
      mid[cc] = (lo + hi) / 2;
    }
    // find a covering element
    int owner = -1;
    for (size_t e = 0; e < ctx.cover.size(); ++e) {
      bool inside = true;
      for (size_t cc = 0; cc < s.dim() && inside; ++cc) {
        std::vector<Interval> scratch;
        bool hit = false;
        for (const auto& iv : ctx.cover.elements[e].intervals(cc, s, scratch))
          if (iv.lo < mid[cc] && mid[cc] < iv.hi) hit = true;
        inside = hit;
      }
      if (inside) {
        owner = static_cast<int>(e);
        break;
      }
    }
    if (owner < 0) {
      fail = true;
      return;
    }
    const ExteriorForm& v = c.at(Tuple{static_cast<uint32_t>(owner)});
    for (const auto& [m, coeff] : v.terms) {
      Piecewise rc = refined(coeff, grid);
      auto it = rc.cells.find(idx);
      if (it == rc.cells.end()) continue;
      auto acc_it = acc.find(m);
      if (acc_it == acc.end()) {
        Piecewise fresh;
        fresh.breaks = grid;
        fresh.cont = coeff.cont;
        fresh.cells[idx] = it->second;
        acc.emplace(m, std::move(fresh));
      } else {
        acc_it->second.cells[idx] = it->second;
      }
    }
  });
  if (fail) return std::nullopt;
  for (auto& [m, coeff] : acc) glued.add_term(m, coeff);
  // final consistency: glued must agree with every element's value
  for (const auto& t : ctx.nerve.level(0))
    if (!equal_on(glued, c.at(t), ctx.domain(t))) return std::nullopt;
  return glued;
}

bool cochain_zero(const CoverContext& ctx, const CechCochain& c, bool skip_degenerate) {
  for (const auto& [t, v] : c.values) {
    if (skip_degenerate && is_degenerate(t)) continue;
    if (!zero_on(v, ctx.domain(t))) return false;
  }
  return true;
}

bool cochain_equal(const CoverContext& ctx, const CechCochain& a, const CechCochain& b,
                   bool skip_degenerate) {
  if (a.p != b.p) return false;
  for (const auto& [t, v] : a.values) {
    if (skip_degenerate && is_degenerate(t)) continue;
    if (!equal_on(v, b.at(t), ctx.domain(t))) return false;
  }
  return true;
}

Integer pair_cocycle_chain(const IntegralCechCocycle& z, const CechChain& c) {
  if (z.p != c.p) throw std::invalid_argument("pairing degree mismatch");
  Integer r = 0;
  for (const auto& [t, coeff] : c.terms) {
    auto it = z.values.find(t);
    if (it == z.values.end()) throw std::out_of_range("chain tuple not in cocycle support");
    r += coeff * it->second;
  }
  return r;
}

CechChain chain_boundary(const CechChain& c) {
  CechChain r{c.p - 1, {}};
  for (const auto& [t, coeff] : c.terms)
    for (size_t nu = 0; nu < t.size(); ++nu)
      r.terms.emplace_back(face(t, nu), (nu % 2 == 0) ? coeff : -coeff);
  return r;
}

CechChain circle_fundamental_cycle(unsigned n) {
  CechChain c{1, {}};
  for (unsigned j = 0; j + 1 < n; ++j) c.terms.push_back({Tuple{j, j + 1}, 1});
  c.terms.push_back({Tuple{0, n - 1}, -1});
  return c;
}

CechChain ez_product_cycle(const CechChain& major, const CechChain& minor, size_t minor_count) {
  if (major.p != 1 || minor.p != 1)
    throw std::invalid_argument("ez_product_cycle implemented for 1-cycles");
  CechChain r{2, {}};
  auto pair_idx = [&](uint32_t a, uint32_t b) {
    return static_cast<uint32_t>(a * minor_count + b);
  };
  for (const auto& [a, ca] : major.terms)
    for (const auto& [b, cb] : minor.terms) {
      // triangulation of the square a x b into two simplices with opposite signs
      Tuple t1{pair_idx(a[0], b[0]), pair_idx(a[1], b[0]), pair_idx(a[1], b[1])};
      Tuple t2{pair_idx(a[0], b[0]), pair_idx(a[0], b[1]), pair_idx(a[1], b[1])};
      r.terms.push_back({t1, ca * cb});
      r.terms.push_back({t2, -ca * cb});
    }
  return r;
}

}  // namespace gerbes
