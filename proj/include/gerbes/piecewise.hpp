#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gerbes/poly.hpp"

namespace gerbes {

// Declared continuity class of a piecewise expression, degraded under
// differentiation and minimized under binary operations.
enum class Cont : uint8_t { Pieced = 0, C0 = 1, C1 = 2, Smooth = 3 };

inline Cont min_cont(Cont a, Cont b) { return a < b ? a : b; }
inline Cont derive_cont(Cont c) {
  switch (c) {
    case Cont::Smooth: return Cont::Smooth;
    case Cont::C1: return Cont::C0;
    default: return Cont::Pieced;
  }
}

// Exact piecewise expression over a rational breakpoint grid.  Breakpoints
// subdivide each coordinate's domain; cells are the products of the resulting
// intervals.  Missing cells are zero.  Pieces partition the domain; values on
// shared boundaries are governed by the declared continuity class.
class Piecewise {
 public:
  std::vector<std::vector<Rational>> breaks;  // per coordinate, sorted, interior
  std::map<std::vector<uint32_t>, Poly> cells;
  Cont cont = Cont::Smooth;

  Piecewise() = default;
  Piecewise(size_t dim, Poly p) : breaks(dim) {
    if (!p.is_zero()) cells[std::vector<uint32_t>(dim, 0)] = std::move(p);
  }
  static Piecewise constant(size_t dim, Rational c) { return Piecewise(dim, Poly(std::move(c))); }

  size_t dim() const { return breaks.size(); }
  bool is_zero() const { return cells.empty(); }

  bool single_cell() const {
    for (const auto& b : breaks)
      if (!b.empty()) return false;
    return true;
  }

  const Poly& only_poly() const {
    static const Poly zero;
    if (cells.empty()) return zero;
    if (!single_cell()) throw std::domain_error("expression has breakpoints");
    return cells.begin()->second;
  }

  bool depends_on(uint32_t c) const {
    if (!breaks.at(c).empty()) return true;
    for (const auto& [idx, p] : cells)
      if (p.depends_on(c)) return true;
    return false;
  }

  size_t piece_count(uint32_t c) const { return breaks.at(c).size() + 1; }

  Interval piece_interval(uint32_t c, uint32_t i, const CoordinateSpace& s) const {
    Rational lo = (i == 0) ? s.at(c).lo : breaks[c][i - 1];
    Rational hi = (i == breaks[c].size()) ? s.at(c).hi : breaks[c][i];
    return Interval{lo, hi};
  }

  // index of the piece containing v (half-open convention, last piece closed)
  uint32_t locate(uint32_t c, const Rational& v) const {
    uint32_t i = 0;
    while (i < breaks[c].size() && !(v < breaks[c][i])) ++i;
    return i;
  }

  void prune() {
    for (auto it = cells.begin(); it != cells.end();)
      it = it->second.is_zero() ? cells.erase(it) : std::next(it);
  }
};

namespace detail {

inline std::vector<Rational> merge_breaks(const std::vector<Rational>& a,
                                          const std::vector<Rational>& b) {
  std::vector<Rational> r;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

// map cell index in the refined grid to the cell index in the coarse grid
inline std::vector<uint32_t> refine_index(const std::vector<Rational>& coarse,
                                          const std::vector<Rational>& fine) {
  std::vector<uint32_t> m(fine.size() + 1);
  uint32_t ci = 0;
  for (size_t fi = 0; fi <= fine.size(); ++fi) {
    // the fine piece [fine[fi-1], fine[fi]) lies in coarse piece ci
    while (ci < coarse.size() && fi > 0 && !(fine[fi - 1] < coarse[ci])) ++ci;
    m[fi] = ci;
  }
  return m;
}

template <typename F>
void for_each_cell(const std::vector<std::vector<Rational>>& breaks, F&& f) {
  std::vector<uint32_t> idx(breaks.size(), 0);
  while (true) {
    f(idx);
    size_t c = 0;
    for (; c < breaks.size(); ++c) {
      if (idx[c] + 1 <= breaks[c].size()) {
        ++idx[c];
        break;
      }
      idx[c] = 0;
    }
    if (c == breaks.size()) break;
  }
}

}  // namespace detail

// Refine p onto a grid that also contains the given breakpoints.
inline Piecewise refined(const Piecewise& p, const std::vector<std::vector<Rational>>& grid) {
  Piecewise r;
  r.cont = p.cont;
  r.breaks.resize(p.dim());
  std::vector<std::vector<uint32_t>> back(p.dim());
  for (size_t c = 0; c < p.dim(); ++c) {
    r.breaks[c] = detail::merge_breaks(p.breaks[c], grid.at(c));
    back[c] = detail::refine_index(p.breaks[c], r.breaks[c]);
  }
  detail::for_each_cell(r.breaks, [&](const std::vector<uint32_t>& idx) {
    std::vector<uint32_t> src(idx.size());
    for (size_t c = 0; c < idx.size(); ++c) src[c] = back[c][idx[c]];
    auto it = p.cells.find(src);
    if (it != p.cells.end() && !it->second.is_zero()) r.cells[idx] = it->second;
  });
  return r;
}

inline Piecewise pw_binary(const Piecewise& a, const Piecewise& b,
                           const std::function<Poly(const Poly&, const Poly&)>& op) {
  if (a.dim() != b.dim()) throw std::invalid_argument("piecewise dimension mismatch");
  Piecewise ra = refined(a, b.breaks);
  Piecewise rb = refined(b, a.breaks);
  Piecewise r;
  r.breaks = ra.breaks;
  r.cont = min_cont(a.cont, b.cont);
  static const Poly zero;
  detail::for_each_cell(r.breaks, [&](const std::vector<uint32_t>& idx) {
    auto ia = ra.cells.find(idx);
    auto ib = rb.cells.find(idx);
    const Poly& pa = (ia == ra.cells.end()) ? zero : ia->second;
    const Poly& pb = (ib == rb.cells.end()) ? zero : ib->second;
    Poly v = op(pa, pb);
    if (!v.is_zero()) r.cells[idx] = std::move(v);
  });
  return r;
}

inline Piecewise operator+(const Piecewise& a, const Piecewise& b) {
  return pw_binary(a, b, [](const Poly& x, const Poly& y) { return x + y; });
}
inline Piecewise operator-(const Piecewise& a, const Piecewise& b) {
  return pw_binary(a, b, [](const Poly& x, const Poly& y) { return x - y; });
}
inline Piecewise operator*(const Piecewise& a, const Piecewise& b) {
  return pw_binary(a, b, [](const Poly& x, const Poly& y) { return x * y; });
}
inline Piecewise operator*(const Piecewise& a, const Rational& s) {
  Piecewise r = a;
  if (s == 0) return Piecewise(a.dim(), Poly());
  for (auto& [i, p] : r.cells) p = p * s;
  return r;
}
inline Piecewise operator-(const Piecewise& a) { return a * Rational(-1); }

inline Piecewise derivative(const Piecewise& p, uint32_t coord) {
  Piecewise r;
  r.breaks = p.breaks;
  r.cont = derive_cont(p.cont);
  for (const auto& [idx, poly] : p.cells) {
    Poly d = derivative(poly, coord);
    if (!d.is_zero()) r.cells[idx] = std::move(d);
  }
  return r;
}

// Exact definite integration of one coordinate over [lo,hi]; the coordinate's
// dependence is removed (its break list becomes empty, index pinned to 0).
inline Piecewise integrate_coord(const Piecewise& p, const CoordinateSpace& s,
                                 uint32_t coord, const Rational& lo, const Rational& hi) {
  Piecewise r;
  r.breaks = p.breaks;
  r.breaks[coord].clear();
  r.cont = p.cont;
  for (const auto& [idx, poly] : p.cells) {
    Interval cell = p.piece_interval(coord, idx[coord], s);
    Rational a = std::max(lo, cell.lo), b = std::min(hi, cell.hi);
    if (!(a < b)) continue;
    Poly v = integrate_interval(poly, coord, a, b);
    if (v.is_zero()) continue;
    std::vector<uint32_t> out = idx;
    out[coord] = 0;
    auto it = r.cells.find(out);
    if (it == r.cells.end())
      r.cells[out] = std::move(v);
    else {
      it->second += v;
      if (it->second.is_zero()) r.cells.erase(it);
    }
  }
  return r;
}

// Integrate a coordinate over its whole domain.
inline Piecewise integrate_full(const Piecewise& p, const CoordinateSpace& s, uint32_t coord) {
  return integrate_coord(p, s, coord, s.at(coord).lo, s.at(coord).hi);
}

// Pin one coordinate to an exact value.
inline Piecewise substitute_const(const Piecewise& p, uint32_t coord, const Rational& v) {
  Piecewise r;
  r.breaks = p.breaks;
  r.breaks[coord].clear();
  r.cont = p.cont;
  uint32_t pick = p.locate(coord, v);
  for (const auto& [idx, poly] : p.cells) {
    if (idx[coord] != pick) continue;
    Poly q = substitute_const(poly, coord, v);
    if (q.is_zero()) continue;
    std::vector<uint32_t> out = idx;
    out[coord] = 0;
    auto it = r.cells.find(out);
    if (it == r.cells.end())
      r.cells[out] = std::move(q);
    else
      it->second += q;
  }
  r.prune();
  return r;
}

inline Rational eval_exact(const Piecewise& p, const std::vector<Rational>& x) {
  std::vector<uint32_t> idx(p.dim());
  for (size_t c = 0; c < p.dim(); ++c) idx[c] = p.locate(c, x[c]);
  auto it = p.cells.find(idx);
  if (it == p.cells.end()) return 0;
  return eval_exact(it->second, x);
}

inline double eval_double(const Piecewise& p, const std::vector<double>& x) {
  std::vector<uint32_t> idx(p.dim());
  for (size_t c = 0; c < p.dim(); ++c) {
    uint32_t i = 0;
    while (i < p.breaks[c].size() && x[c] >= to_double(p.breaks[c][i])) ++i;
    idx[c] = i;
  }
  auto it = p.cells.find(idx);
  if (it == p.cells.end()) return 0.0;
  return eval_double(it->second, x);
}

// Is p identically zero on the given domain?  Exact: a polynomial vanishing
// on a positive-measure cell is the zero polynomial.
inline bool zero_on(const Piecewise& p, const CoordinateSpace& s, const Domain& dom) {
  std::vector<std::vector<Rational>> grid(p.dim());
  for (size_t c = 0; c < p.dim(); ++c) {
    std::vector<Interval> scratch;
    for (const auto& iv : dom.intervals(c, s, scratch)) {
      grid[c].push_back(iv.lo);
      grid[c].push_back(iv.hi);
    }
    std::sort(grid[c].begin(), grid[c].end());
    grid[c].erase(std::unique(grid[c].begin(), grid[c].end()), grid[c].end());
  }
  Piecewise r = refined(p, grid);
  for (const auto& [idx, poly] : r.cells) {
    if (poly.is_zero()) continue;
    bool inside = true;
    for (size_t c = 0; c < r.dim() && inside; ++c) {
      Interval cell = r.piece_interval(c, idx[c], s);
      std::vector<Interval> scratch;
      bool hit = false;
      for (const auto& iv : dom.intervals(c, s, scratch)) {
        Interval mid{std::max(cell.lo, iv.lo), std::min(cell.hi, iv.hi)};
        if (!mid.empty()) hit = true;
      }
      inside = hit;
    }
    if (inside) return false;
  }
  return true;
}

inline bool equal_on(const Piecewise& a, const Piecewise& b, const CoordinateSpace& s,
                     const Domain& dom) {
  return zero_on(a - b, s, dom);
}

// Shift all coordinate indices of a polynomial by a fixed offset.
inline Poly reindex_poly(const Poly& p, int offset) {
  Poly r;
  for (const auto& [m, c] : p.terms) {
    Monomial nm = m;
    for (auto& f : nm.factors) f.coord = static_cast<uint32_t>(static_cast<int>(f.coord) + offset);
    r.terms.emplace(std::move(nm), c);
  }
  return r;
}

// Embed a piecewise expression into a larger coordinate list at `offset`.
inline Piecewise embed_pw(const Piecewise& p, size_t offset, size_t total_dim) {
  Piecewise r;
  r.cont = p.cont;
  r.breaks.assign(total_dim, {});
  for (size_t c = 0; c < p.dim(); ++c) r.breaks[c + offset] = p.breaks[c];
  for (const auto& [idx, poly] : p.cells) {
    std::vector<uint32_t> nidx(total_dim, 0);
    for (size_t c = 0; c < idx.size(); ++c) nidx[c + offset] = idx[c];
    r.cells[nidx] = reindex_poly(poly, static_cast<int>(offset));
  }
  return r;
}

// Verify the declared continuity class at interior breakpoints: pieces must
// agree up to `order` derivatives along the broken coordinate.  Sampling-free:
// compares boundary restrictions as polynomials in the other coordinates.
inline bool check_continuity(const Piecewise& p, const CoordinateSpace& s, int order) {
  static const Poly zero;
  for (size_t c = 0; c < p.dim(); ++c) {
    for (size_t bi = 0; bi < p.breaks[c].size(); ++bi) {
      const Rational& b = p.breaks[c][bi];
      // compare cells (.. ,bi, ..) and (.., bi+1, ..) at coordinate value b
      for (const auto& [idx, poly] : p.cells) {
        if (idx[c] != bi) continue;
        std::vector<uint32_t> jdx = idx;
        jdx[c] = static_cast<uint32_t>(bi + 1);
        auto it = p.cells.find(jdx);
        const Poly& other = (it == p.cells.end()) ? zero : it->second;
        Poly l = poly, r = other;
        for (int d = 0; d <= order; ++d) {
          if (!(substitute_const(l, static_cast<uint32_t>(c), b) ==
                substitute_const(r, static_cast<uint32_t>(c), b)))
            return false;
          l = derivative(l, static_cast<uint32_t>(c));
          r = derivative(r, static_cast<uint32_t>(c));
        }
      }
      // cells present on the right but absent on the left
      for (const auto& [idx, poly] : p.cells) {
        if (idx[c] != bi + 1) continue;
        std::vector<uint32_t> jdx = idx;
        jdx[c] = static_cast<uint32_t>(bi);
        if (p.cells.count(jdx)) continue;  // already compared
        Poly l = poly;
        for (int d = 0; d <= order; ++d) {
          if (!(substitute_const(l, static_cast<uint32_t>(c), b) == Poly()))
            return false;
          l = derivative(l, static_cast<uint32_t>(c));
        }
      }
    }
  }
  return true;
}

}  // namespace gerbes
