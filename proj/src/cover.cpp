#include "gerbes/cover.hpp"

#include <algorithm>

namespace gerbes {

namespace {

Poly smoothstep(const Poly& u, PouKind kind) {
  if (kind == PouKind::PL) return u;
  return pow(u, 2) * Rational(3) - pow(u, 3) * Rational(2);
}

// connected as a subset of the circle (intervals of [0,1] glued at 0~1)
bool circle_connected(const std::vector<Interval>& ivs) {
  if (ivs.size() <= 1) return true;
  if (ivs.size() == 2) {
    const Interval& a = ivs[0];
    const Interval& b = ivs[1];
    return a.lo == 0 && b.hi == 1;
  }
  return false;
}

}  // namespace

CircleCover build_circle_cover(unsigned n, const Rational& delta, PouKind pou,
                               const std::string& coord) {
  if (n < 3) throw std::invalid_argument("circle cover needs at least 3 arcs");
  if (!(delta > 0) || !(delta < Rational(1, 2 * n)))
    throw std::domain_error("bad cover: overlap delta must lie in (0, 1/(2n))");
  ManifoldModel model = circle_model(coord);
  Rational h = Rational(1, 2 * n) + delta;

  GoodCover cover{model, {}, "circle" + std::to_string(n)};
  for (unsigned j = 0; j < n; ++j) {
    Rational c = Rational(j, n);
    Domain d = Domain::whole(model.space);
    d.per_coord[0] = circle_arc(c - h, c + h);
    cover.elements.push_back(d);
  }

  // global breakpoint grid: arc starts and transition ends
  std::vector<Rational> breaks;
  for (unsigned j = 0; j < n; ++j) {
    Rational start = mod1(Rational(j, n) - h);
    Rational tend = mod1(start + 2 * delta);
    breaks.push_back(start);
    breaks.push_back(tend);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  while (!breaks.empty() && breaks.front() == 0) breaks.erase(breaks.begin());

  PartitionOfUnity p;
  p.id = (pou == PouKind::PL) ? "pl" : "c1cubic";
  p.cont = (pou == PouKind::PL) ? Cont::C0 : Cont::C1;
  Poly x = Poly::coord(0);
  for (unsigned j = 0; j < n; ++j) {
    Piecewise f;
    f.breaks = {breaks};
    f.cont = p.cont;
    Rational start = Rational(j, n) - h;  // rising transition begins here (mod 1)
    for (uint32_t ci = 0; ci <= breaks.size(); ++ci) {
      Rational lo = (ci == 0) ? Rational(0) : breaks[ci - 1];
      Rational hi = (ci == breaks.size()) ? Rational(1) : breaks[ci];
      Rational mid = (lo + hi) / 2;
      // distance from arc start, lifted to [0,1)
      Rational d = mod1(mid - start);
      if (!(d < 2 * h)) continue;  // outside the arc
      Rational shift = start + Rational(rfloor(mid - start));  // lift of arc start
      Poly u = (x - Poly(shift)) * (Rational(1) / (2 * delta));
      Poly val;
      if (d < 2 * delta) {
        val = smoothstep(u, pou);  // rising edge shared with the previous arc
      } else if (d < Rational(1, n)) {
        val = Poly(Rational(1));  // plateau
      } else {
        // falling edge shared with the next arc, starting at shift + 1/n
        Poly v = (x - Poly(shift + Rational(1, n))) * (Rational(1) / (2 * delta));
        val = Poly(Rational(1)) - smoothstep(v, pou);
      }
      if (!val.is_zero()) f.cells[{ci}] = val;
    }
    p.phi.push_back(std::move(f));
  }
  return CircleCover{std::move(cover), std::move(p)};
}

CircleCover build_box_cover(const ManifoldModel& box, unsigned parts, const Rational& overlap,
                            PouKind pou) {
  GoodCover cover{box, {}, "box" + std::to_string(parts)};
  PartitionOfUnity p;
  p.id = (pou == PouKind::PL) ? "pl" : "c1cubic";
  p.cont = (pou == PouKind::PL) ? Cont::C0 : Cont::C1;
  if (parts == 1) {
    cover.elements.push_back(Domain::whole(box.space));
    p.phi.push_back(Piecewise(box.space.dim(), Poly(Rational(1))));
    return CircleCover{std::move(cover), std::move(p)};
  }
  // overlapping slabs along the first axis
  const Coordinate& c0 = box.space.at(0);
  Rational len = c0.hi - c0.lo;
  Rational w = len / parts;
  if (!(overlap > 0) || !(overlap < w / 2))
    throw std::domain_error("bad cover: slab overlap out of range");
  Poly x = Poly::coord(0);
  std::vector<Rational> breaks;
  for (unsigned j = 1; j < parts; ++j) {
    breaks.push_back(c0.lo + w * j - overlap);
    breaks.push_back(c0.lo + w * j + overlap);
  }
  for (unsigned j = 0; j < parts; ++j) {
    Rational lo = (j == 0) ? c0.lo : c0.lo + w * j - overlap;
    Rational hi = (j + 1 == parts) ? c0.hi : c0.lo + w * (j + 1) + overlap;
    Domain d = Domain::whole(box.space);
    d.per_coord[0] = {Interval{lo, hi}};
    cover.elements.push_back(d);

    Piecewise f(box.space.dim(), Poly());
    f.breaks[0] = breaks;
    f.cont = p.cont;
    for (uint32_t ci = 0; ci <= breaks.size(); ++ci) {
      Rational clo = (ci == 0) ? c0.lo : breaks[ci - 1];
      Rational chi = (ci == breaks.size()) ? c0.hi : breaks[ci];
      Rational mid = (clo + chi) / 2;
      if (!(mid > lo && mid < hi)) continue;
      Poly val(Rational(1));
      if (j > 0 && mid < lo + 2 * overlap)
        val = smoothstep((x - Poly(lo)) * (Rational(1) / (2 * overlap)), pou);
      else if (j + 1 < parts && mid > hi - 2 * overlap)
        val = Poly(Rational(1)) -
              smoothstep((x - Poly(hi - 2 * overlap)) * (Rational(1) / (2 * overlap)), pou);
      std::vector<uint32_t> idx(box.space.dim(), 0);
      idx[0] = ci;
      if (!val.is_zero()) f.cells[idx] = val;
    }
    p.phi.push_back(std::move(f));
  }
  return CircleCover{std::move(cover), std::move(p)};
}

namespace {

Domain lift_domain(const Domain& d, size_t offset, size_t total) {
  Domain r;
  r.per_coord.assign(total, {});
  for (size_t c = 0; c < d.per_coord.size(); ++c) r.per_coord[c + offset] = d.per_coord[c];
  return r;
}

Piecewise lift_pw(const Piecewise& p, size_t offset, size_t total) {
  Piecewise r;
  r.cont = p.cont;
  r.breaks.assign(total, {});
  for (size_t c = 0; c < p.dim(); ++c) r.breaks[c + offset] = p.breaks[c];
  for (const auto& [idx, poly] : p.cells) {
    std::vector<uint32_t> nidx(total, 0);
    for (size_t c = 0; c < idx.size(); ++c) nidx[c + offset] = idx[c];
    Poly q;
    for (const auto& [m, cv] : poly.terms) {
      Monomial nm = m;
      for (auto& f : nm.factors) f.coord += static_cast<uint32_t>(offset);
      q.add_term(nm, cv);
    }
    r.cells[nidx] = std::move(q);
  }
  return r;
}

}  // namespace

GoodCover product_cover(const GoodCover& a, const GoodCover& b) {
  GoodCover r{product(a.model, b.model), {}, a.id + "*" + b.id};
  size_t total = r.model.space.dim();
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) {
      Domain d = lift_domain(a.elements[i], 0, total);
      Domain dj = lift_domain(b.elements[j], a.model.space.dim(), total);
      auto x = intersect(d, dj, r.model.space);
      r.elements.push_back(*x);
    }
  return r;
}

PartitionOfUnity product_pou(const GoodCover& a, const PartitionOfUnity& pa,
                             const GoodCover& b, const PartitionOfUnity& pb) {
  PartitionOfUnity r;
  r.id = pa.id;
  r.cont = min_cont(pa.cont, pb.cont);
  size_t total = a.model.space.dim() + b.model.space.dim();
  for (size_t i = 0; i < pa.phi.size(); ++i)
    for (size_t j = 0; j < pb.phi.size(); ++j)
      r.phi.push_back(lift_pw(pa.phi[i], 0, total) *
                      lift_pw(pb.phi[j], a.model.space.dim(), total));
  return r;
}

GoodCover product_fibration_cover(const GoodCover& fibre, const GoodCover& base) {
  GoodCover r{product(fibre.model, base.model), {}, base.id + "x" + fibre.id};
  size_t total = r.model.space.dim();
  for (size_t i = 0; i < base.size(); ++i)
    for (size_t j = 0; j < fibre.size(); ++j) {
      Domain dj = lift_domain(fibre.elements[j], 0, total);
      Domain di = lift_domain(base.elements[i], fibre.model.space.dim(), total);
      auto x = intersect(dj, di, r.model.space);
      r.elements.push_back(*x);
    }
  return r;
}

std::optional<Domain> tuple_domain(const GoodCover& c, const std::vector<uint32_t>& tuple) {
  Domain d = Domain::whole(c.model.space);
  for (uint32_t i : tuple) {
    auto x = intersect(d, c.elements.at(i), c.model.space);
    if (!x) return std::nullopt;
    d = *x;
  }
  return d;
}

CoverReport validate_good_cover(const GoodCover& c) {
  CoverReport rep;
  const auto& s = c.model.space;
  for (size_t i = 0; i < c.size(); ++i)
    for (size_t j = i; j < c.size(); ++j) {
      auto d = intersect(c.elements[i], c.elements[j], s);
      if (!d) continue;
      for (size_t coord = 0; coord < s.dim(); ++coord) {
        std::vector<Interval> scratch;
        const auto& ivs = d->intervals(coord, s, scratch);
        if (s.at(coord).kind == CoordKind::Periodic) {
          Rational total = 0;
          for (const auto& iv : ivs) total += iv.hi - iv.lo;
          if (total >= 1 || !circle_connected(ivs)) {
            rep.good = false;
            rep.problems.push_back("intersection (" + std::to_string(i) + "," +
                                   std::to_string(j) + ") not contractible in " +
                                   s.at(coord).name);
          }
        } else if (ivs.size() > 1) {
          rep.good = false;
          rep.problems.push_back("intersection (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") disconnected in " + s.at(coord).name);
        }
      }
    }
  return rep;
}

CoverReport verify_pou(const GoodCover& c, const PartitionOfUnity& pou, int samples) {
  CoverReport rep;
  const auto& s = c.model.space;
  if (pou.phi.size() != c.size()) {
    rep.good = false;
    rep.problems.push_back("partition size mismatch");
    return rep;
  }
  // exact piecewise identity: sum phi = 1
  Piecewise sum(s.dim(), Poly());
  for (const auto& f : pou.phi) sum = sum + f;
  if (!zero_on(sum - Piecewise(s.dim(), Poly(Rational(1))), s, Domain::whole(s))) {
    rep.good = false;
    rep.problems.push_back("sum of bumps is not exactly 1");
  }
  // support containment: phi_j = 0 outside element j, checked per coordinate slab
  for (size_t j = 0; j < c.size(); ++j) {
    for (size_t coord = 0; coord < s.dim(); ++coord) {
      if (!c.elements[j].restricts(coord)) continue;
      std::vector<Interval> comp;
      Rational cur = s.at(coord).lo;
      for (const auto& iv : c.elements[j].per_coord[coord]) {
        if (cur < iv.lo) comp.push_back(Interval{cur, iv.lo});
        cur = iv.hi;
      }
      if (cur < s.at(coord).hi) comp.push_back(Interval{cur, s.at(coord).hi});
      if (comp.empty()) continue;
      Domain outside = Domain::whole(s);
      outside.per_coord[coord] = comp;
      if (!zero_on(pou.phi[j], s, outside)) {
        rep.good = false;
        rep.problems.push_back("bump " + std::to_string(j) + " leaks outside its element");
      }
    }
    // nonnegativity on a rational sample grid
    for (int k = 0; k < samples; ++k) {
      std::vector<Rational> x;
      for (size_t coord = 0; coord < s.dim(); ++coord) {
        Rational lo = s.at(coord).lo, hi = s.at(coord).hi;
        x.push_back(lo + (hi - lo) * Rational(2 * k + 1, 2 * samples));
      }
      if (eval_exact(pou.phi[j], x) < 0) {
        rep.good = false;
        rep.problems.push_back("bump " + std::to_string(j) + " negative at a sample point");
        break;
      }
    }
  }
  return rep;
}

}  // namespace gerbes
