#include "gerbes/form.hpp"

#include <algorithm>
#include <cmath>

namespace gerbes {

int concat_sign(WedgeMask a, WedgeMask b) {
  // inversions between (a ascending)(b ascending): pairs i in a, j in b, i > j
  int inv = 0;
  for (uint32_t i = 0; i < 64; ++i) {
    if (!mask_has(a, i)) continue;
    WedgeMask lower = (i == 0) ? 0 : (b & ((WedgeMask(1) << i) - 1));
    inv += popcount(lower);
  }
  return (inv % 2 == 0) ? 1 : -1;
}

int front_extraction_sign(WedgeMask mask, WedgeMask s) {
  WedgeMask rest = mask & ~s;
  int inv = 0;
  for (uint32_t i = 0; i < 64; ++i) {
    if (!mask_has(s, i)) continue;
    WedgeMask lower = (i == 0) ? 0 : (rest & ((WedgeMask(1) << i) - 1));
    inv += popcount(lower);
  }
  return (inv % 2 == 0) ? 1 : -1;
}

ExteriorForm operator+(const ExteriorForm& a, const ExteriorForm& b) {
  if (a.space != b.space) throw std::invalid_argument("coordinate space mismatch");
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.degree != b.degree) throw std::invalid_argument("degree mismatch in sum");
  ExteriorForm r = a;
  for (const auto& [m, c] : b.terms) r.add_term(m, c);
  return r;
}

ExteriorForm operator-(const ExteriorForm& a, const ExteriorForm& b) { return a + b * Rational(-1); }

ExteriorForm operator*(const ExteriorForm& a, const Rational& s) {
  ExteriorForm r(a.space, a.degree);
  if (s == 0) return r;
  for (const auto& [m, c] : a.terms) r.terms[m] = c * s;
  return r;
}

ExteriorForm wedge(const ExteriorForm& a, const ExteriorForm& b) {
  if (a.space != b.space) throw std::invalid_argument("coordinate space mismatch in wedge");
  ExteriorForm r(a.space, a.degree + b.degree);
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) {
      if (ma & mb) continue;  // repeated differential
      int sg = concat_sign(ma, mb);
      Piecewise c = ca * cb;
      if (sg < 0) c = -c;
      r.add_term(ma | mb, c);
    }
  return r;
}

ExteriorForm wedge_pow(const ExteriorForm& a, unsigned n) {
  ExteriorForm r = ExteriorForm::scalar(a.space, Piecewise(a.space.dim(), Poly(Rational(1))));
  for (unsigned i = 0; i < n; ++i) r = wedge(r, a);
  return r;
}

ExteriorForm exterior_d(const ExteriorForm& a) {
  ExteriorForm r(a.space, a.degree + 1);
  for (const auto& [m, c] : a.terms) {
    for (uint32_t u = 0; u < a.space.dim(); ++u) {
      if (mask_has(m, u)) continue;
      if (!c.depends_on(u)) continue;
      Piecewise dc = derivative(c, u);
      if (dc.is_zero()) continue;
      WedgeMask lower = (u == 0) ? 0 : (m & ((WedgeMask(1) << u) - 1));
      if (popcount(lower) % 2 == 1) dc = -dc;
      r.add_term(m | (WedgeMask(1) << u), dc);
    }
  }
  return r;
}

bool zero_on(const ExteriorForm& a, const Domain& dom) {
  for (const auto& [m, c] : a.terms)
    if (!zero_on(c, a.space, dom)) return false;
  return true;
}

bool equal_on(const ExteriorForm& a, const ExteriorForm& b, const Domain& dom) {
  if (a.space != b.space) return false;
  if (a.is_zero() && b.is_zero()) return true;
  if (!a.is_zero() && !b.is_zero() && a.degree != b.degree) return false;
  ExteriorForm d = a.is_zero() ? b * Rational(-1) : (b.is_zero() ? a : a - b);
  return zero_on(d, dom);
}

bool equal_forms(const ExteriorForm& a, const ExteriorForm& b) {
  return equal_on(a, b, Domain::whole(a.space));
}

double sup_sample(const ExteriorForm& a, int samples_per_axis) {
  double best = 0;
  size_t n = a.space.dim();
  std::vector<double> x(n);
  std::vector<int> idx(n, 0);
  while (true) {
    for (size_t c = 0; c < n; ++c) {
      double lo = to_double(a.space.at(c).lo), hi = to_double(a.space.at(c).hi);
      x[c] = lo + (hi - lo) * (idx[c] + 0.5) / samples_per_axis;
    }
    for (const auto& [m, cf] : a.terms) best = std::max(best, std::fabs(eval_double(cf, x)));
    size_t c = 0;
    for (; c < n; ++c) {
      if (++idx[c] < samples_per_axis) break;
      idx[c] = 0;
    }
    if (c == n) {
      if (n == 0)
        for (const auto& [m, cf] : a.terms)
          best = std::max(best, std::fabs(eval_double(cf, {})));
      break;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

Substitution Substitution::identity_extend(const CoordinateSpace& src,
                                           const CoordinateSpace& dst) {
  Substitution s{src, dst, {}};
  s.map.resize(src.dim(), Piecewise(dst.dim(), Poly()));
  for (size_t c = 0; c < src.dim(); ++c) {
    int j = dst.index_of(src.at(c).name);
    if (j >= 0) s.map[c] = Piecewise(dst.dim(), Poly::coord(static_cast<uint32_t>(j)));
  }
  return s;
}

namespace {

// affine-in-one-dst-coordinate decomposition: expr = a * v + b
struct Affine1 {
  uint32_t v;
  Rational a, b;
};

std::optional<Affine1> as_affine1(const Piecewise& e) {
  if (!e.single_cell()) return std::nullopt;
  const Poly& p = e.only_poly();
  Affine1 r{0, 0, 0};
  for (const auto& [m, c] : p.terms) {
    if (m.factors.empty()) {
      r.b = c;
    } else if (m.factors.size() == 1 && m.factors[0].pow == 1 &&
               m.factors[0].trig == Trig::None) {
      if (r.a != 0) return std::nullopt;
      r.a = c;
      r.v = m.factors[0].coord;
    } else {
      return std::nullopt;
    }
  }
  if (r.a == 0) return std::nullopt;
  return r;
}

Poly reindex(const Poly& p, uint32_t offset) {
  Poly r;
  for (const auto& [m, c] : p.terms) {
    Monomial nm = m;
    for (auto& f : nm.factors) f.coord += offset;
    r.terms.emplace(std::move(nm), c);
  }
  return r;
}

}  // namespace

ExteriorForm pullback(const Substitution& s, const ExteriorForm& a) {
  if (a.space != s.src) throw std::invalid_argument("pullback: source space mismatch");
  const uint32_t nd = static_cast<uint32_t>(s.dst.dim());
  ExteriorForm result(s.dst, a.degree);

  // differentials of the substitution entries, as 1-forms on dst
  std::vector<ExteriorForm> dmap(s.src.dim(), ExteriorForm(s.dst, 1));
  for (size_t c = 0; c < s.src.dim(); ++c)
    dmap[c] = exterior_d(ExteriorForm::scalar(s.dst, s.map[c]));

  for (const auto& [mask, coeff] : a.terms) {
    // target grid for the substituted coefficient
    std::vector<std::vector<Rational>> grid(nd);
    for (uint32_t c = 0; c < s.src.dim(); ++c) {
      if (!coeff.depends_on(c)) continue;
      // grid contributed by a piecewise substitution expression
      for (uint32_t dc = 0; dc < nd; ++dc)
        for (const auto& b : s.map[c].breaks[dc]) grid[dc].push_back(b);
      if (!coeff.breaks[c].empty()) {
        auto aff = as_affine1(s.map[c]);
        if (!aff)
          throw std::domain_error(
              "pullback: breakpoints in a coordinate with a non-affine substitution");
        for (const auto& b : coeff.breaks[c]) grid[aff->v].push_back((b - aff->b) / aff->a);
      }
    }
    for (auto& g : grid) {
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
      // clip to dst domain interior
      std::vector<Rational> gg;
      for (auto& b : g) gg.push_back(b);
      g.clear();
      for (auto& b : gg) g.push_back(b);
    }
    for (uint32_t dc = 0; dc < nd; ++dc) {
      std::vector<Rational> clipped;
      for (const auto& b : grid[dc])
        if (s.dst.at(dc).lo < b && b < s.dst.at(dc).hi) clipped.push_back(b);
      grid[dc] = std::move(clipped);
    }

    Piecewise sub;
    sub.breaks = grid;
    sub.cont = coeff.cont;
    detail::for_each_cell(grid, [&](const std::vector<uint32_t>& idx) {
      // midpoints of the dst cell, used to locate source pieces of affine maps
      std::vector<Rational> mid(nd);
      for (uint32_t dc = 0; dc < nd; ++dc) {
        Rational lo = (idx[dc] == 0) ? s.dst.at(dc).lo : grid[dc][idx[dc] - 1];
        Rational hi = (idx[dc] == grid[dc].size()) ? s.dst.at(dc).hi : grid[dc][idx[dc]];
        mid[dc] = (lo + hi) / 2;
      }
      // locate the source cell
      std::vector<uint32_t> sidx(s.src.dim(), 0);
      for (uint32_t c = 0; c < s.src.dim(); ++c) {
        if (coeff.breaks[c].empty()) continue;
        auto aff = as_affine1(s.map[c]);
        Rational v = aff->a * mid[aff->v] + aff->b;
        sidx[c] = coeff.locate(c, v);
      }
      auto it = coeff.cells.find(sidx);
      if (it == coeff.cells.end()) return;
      // substitute into the source poly, shifted to a scratch index range
      Poly cur = reindex(it->second, nd);
      for (uint32_t c = 0; c < s.src.dim(); ++c) {
        if (!cur.depends_on(c + nd)) continue;
        // the substitution expression restricted to this dst cell
        std::vector<uint32_t> eidx(nd, 0);
        for (uint32_t dc = 0; dc < nd; ++dc)
          if (!s.map[c].breaks[dc].empty()) eidx[dc] = s.map[c].locate(dc, mid[dc]);
        auto eit = s.map[c].cells.find(eidx);
        Poly q = (eit == s.map[c].cells.end()) ? Poly() : eit->second;
        cur = substitute(cur, c + nd, q);
      }
      if (!cur.is_zero()) sub.cells[idx] = std::move(cur);
    });

    // wedge factor: product of the pulled-back differentials, in mask order
    ExteriorForm w = ExteriorForm::scalar(s.dst, sub);
    for (uint32_t c = 0; c < 64 && (mask >> c); ++c)
      if (mask_has(mask, c)) {
        w = wedge(w, dmap[c]);
        if (w.is_zero()) break;
      }
    if (!w.is_zero()) result = result + w;
  }
  return result;
}

// ---------------------------------------------------------------------------

static ExteriorForm integrate_generic(const ExteriorForm& a, const std::vector<uint32_t>& coords,
                                      bool require_periodic) {
  WedgeMask smask = 0;
  for (uint32_t c : coords) {
    if (require_periodic && a.space.at(c).kind != CoordKind::Periodic)
      throw std::invalid_argument("integrate_periodic: coordinate is not periodic");
    smask |= WedgeMask(1) << c;
  }
  ExteriorForm r(a.space, a.degree - static_cast<int>(coords.size()));
  for (const auto& [mask, coeff] : a.terms) {
    if ((mask & smask) != smask) continue;  // missing fibre differential
    int sg = front_extraction_sign(mask, smask);
    Piecewise c = coeff;
    for (uint32_t u : coords) c = integrate_full(c, a.space, u);
    if (c.is_zero()) continue;
    if (sg < 0) c = -c;
    r.add_term(mask & ~smask, c);
  }
  return r;
}

ExteriorForm integrate_periodic(const ExteriorForm& a, const std::vector<uint32_t>& coords) {
  return integrate_generic(a, coords, true);
}

ExteriorForm integrate_coords_full(const ExteriorForm& a, const std::vector<uint32_t>& coords) {
  return integrate_generic(a, coords, false);
}

ExteriorForm integrate_simplex(const ExteriorForm& a, size_t p) {
  if (a.space.simplex_dim() < p) throw std::invalid_argument("integrate_simplex: level too big");
  WedgeMask tmask = (p == 0) ? 0 : ((WedgeMask(1) << p) - 1);
  ExteriorForm r(a.space, a.degree - static_cast<int>(p));
  for (const auto& [mask, coeff] : a.terms) {
    if ((mask & tmask) != tmask) continue;  // barycentric degree != p
    // also reject terms with extra t-differentials beyond the block (none exist)
    for (uint32_t c = 0; c < p; ++c)
      if (!coeff.breaks[c].empty())
        throw std::domain_error("integrate_simplex: breakpoints in barycentric coordinates");
    // Dirichlet integral per monomial over the standard simplex
    Piecewise out;
    out.breaks = coeff.breaks;
    out.cont = coeff.cont;
    for (const auto& [idx, poly] : coeff.cells) {
      Poly q;
      for (const auto& [m, cv] : poly.terms) {
        Integer num = 1;
        Integer total = 0;
        Monomial rest;
        for (const auto& f : m.factors) {
          if (f.coord < p) {
            if (f.trig != Trig::None)
              throw std::domain_error("trig factor on barycentric coordinate");
            num *= factorial(f.pow);
            total += f.pow;
          } else {
            rest.factors.push_back(f);
          }
        }
        Rational scale(num, factorial(static_cast<unsigned>(total.convert_to<unsigned long>()) +
                                      static_cast<unsigned>(p)));
        q.add_term(rest, cv * scale);
      }
      if (!q.is_zero()) out.cells[idx] = std::move(q);
    }
    if (out.is_zero()) continue;
    r.add_term(mask & ~tmask, out);
  }
  return r;
}

ExteriorForm drop_simplex_block(const ExteriorForm& a, size_t p) {
  if (p == 0) return a;
  CoordinateSpace reduced;
  reduced.coords.assign(a.space.coords.begin() + p, a.space.coords.end());
  ExteriorForm r(reduced, a.degree);
  for (const auto& [mask, coeff] : a.terms) {
    if (mask & ((WedgeMask(1) << p) - 1))
      throw std::domain_error("drop_simplex_block: form still has barycentric differentials");
    Piecewise c;
    c.cont = coeff.cont;
    c.breaks.assign(coeff.breaks.begin() + p, coeff.breaks.end());
    for (const auto& [idx, poly] : coeff.cells) {
      for (uint32_t tc = 0; tc < p; ++tc)
        if (poly.depends_on(tc))
          throw std::domain_error("drop_simplex_block: coefficient depends on t");
      std::vector<uint32_t> nidx(idx.begin() + p, idx.end());
      Poly q;
      for (const auto& [m, cv] : poly.terms) {
        Monomial nm = m;
        for (auto& f : nm.factors) f.coord -= static_cast<uint32_t>(p);
        q.add_term(nm, cv);
      }
      if (!q.is_zero()) {
        auto it = c.cells.find(nidx);
        if (it == c.cells.end())
          c.cells[nidx] = std::move(q);
        else
          it->second += q;
      }
    }
    c.prune();
    r.add_term(mask >> p, c);
  }
  return r;
}

ExteriorForm lift_to_simplex(const ExteriorForm& a, size_t p) {
  if (p == 0) return a;
  CoordinateSpace lifted = product(simplex_space(p), a.space);
  ExteriorForm r(lifted, a.degree);
  for (const auto& [mask, coeff] : a.terms) {
    Piecewise c;
    c.cont = coeff.cont;
    c.breaks.assign(p, {});
    for (const auto& b : coeff.breaks) c.breaks.push_back(b);
    for (const auto& [idx, poly] : coeff.cells) {
      std::vector<uint32_t> nidx(p, 0);
      nidx.insert(nidx.end(), idx.begin(), idx.end());
      Poly q;
      for (const auto& [m, cv] : poly.terms) {
        Monomial nm = m;
        for (auto& f : nm.factors) f.coord += static_cast<uint32_t>(p);
        q.add_term(nm, cv);
      }
      c.cells[nidx] = std::move(q);
    }
    r.add_term(mask << p, c);
  }
  return r;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const ExteriorForm& a) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [mask, coeff] : a.terms) {
    nlohmann::json wedgev = nlohmann::json::array();
    for (uint32_t c = 0; c < a.space.dim(); ++c)
      if (mask_has(mask, c)) wedgev.push_back(a.space.at(c).name);
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& [idx, poly] : coeff.cells) {
      nlohmann::json monos = nlohmann::json::array();
      for (const auto& [m, cv] : poly.terms) {
        nlohmann::json factors = nlohmann::json::array();
        for (const auto& f : m.factors) {
          nlohmann::json fj;
          fj["coord"] = a.space.at(f.coord).name;
          if (f.pow) fj["pow"] = f.pow;
          if (f.trig != Trig::None) {
            fj["trig"] = (f.trig == Trig::Cos) ? "cos" : "sin";
            fj["freq"] = f.freq;
          }
          factors.push_back(fj);
        }
        monos.push_back({{"coeff", to_string(cv)}, {"factors", factors}});
      }
      pieces.push_back({{"cell", idx}, {"poly", monos}});
    }
    nlohmann::json breaks = nlohmann::json::array();
    for (const auto& bs : coeff.breaks) {
      nlohmann::json b = nlohmann::json::array();
      for (const auto& v : bs) b.push_back(to_string(v));
      breaks.push_back(b);
    }
    terms.push_back({{"wedge", wedgev}, {"coeff", {{"breaks", breaks}, {"pieces", pieces}}}});
  }
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& c : a.space.coords)
    coords.push_back({{"name", c.name},
                      {"kind", c.kind == CoordKind::Periodic   ? "periodic"
                               : c.kind == CoordKind::Affine   ? "affine"
                                                               : "barycentric"},
                      {"lo", to_string(c.lo)},
                      {"hi", to_string(c.hi)}});
  return {{"space", coords}, {"degree", a.degree}, {"terms", terms}};
}

}  // namespace gerbes
