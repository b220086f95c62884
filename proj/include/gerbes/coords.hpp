#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gerbes/rational.hpp"

namespace gerbes {

// Coordinate kinds on a chart product.  Periodic coordinates have period 1
// (circle = R/Z).  Affine coordinates live on a rational interval.
// Barycentric coordinates t_1..t_p are the free parameters of a standard
// simplex; t_0 = 1 - sum is never stored.
enum class CoordKind : uint8_t { Periodic, Affine, Barycentric };

struct Coordinate {
  std::string name;
  CoordKind kind = CoordKind::Affine;
  Rational lo = 0;  // domain bounds; [0,1] for periodic and barycentric
  Rational hi = 1;

  bool operator==(const Coordinate& o) const {
    return name == o.name && kind == o.kind && lo == o.lo && hi == o.hi;
  }
};

struct CoordinateSpace {
  std::vector<Coordinate> coords;

  size_t dim() const { return coords.size(); }

  int index_of(const std::string& name) const {
    for (size_t i = 0; i < coords.size(); ++i)
      if (coords[i].name == name) return static_cast<int>(i);
    return -1;
  }

  const Coordinate& at(size_t i) const { return coords.at(i); }

  bool operator==(const CoordinateSpace& o) const { return coords == o.coords; }
  bool operator!=(const CoordinateSpace& o) const { return !(*this == o); }

  // Number of leading barycentric coordinates (the simplex block).
  size_t simplex_dim() const {
    size_t p = 0;
    while (p < coords.size() && coords[p].kind == CoordKind::Barycentric) ++p;
    return p;
  }
};

inline CoordinateSpace make_space(std::vector<Coordinate> cs) {
  CoordinateSpace s{std::move(cs)};
  for (size_t i = 0; i < s.coords.size(); ++i)
    for (size_t j = i + 1; j < s.coords.size(); ++j)
      if (s.coords[i].name == s.coords[j].name)
        throw std::invalid_argument("duplicate coordinate name: " + s.coords[i].name);
  return s;
}

inline Coordinate periodic_coord(const std::string& name) {
  return Coordinate{name, CoordKind::Periodic, 0, 1};
}

inline Coordinate affine_coord(const std::string& name, Rational lo, Rational hi) {
  if (!(lo < hi)) throw std::invalid_argument("affine coordinate with empty interval");
  return Coordinate{name, CoordKind::Affine, lo, hi};
}

// Simplex parameter space for Delta^p: free coordinates t1..tp.
inline CoordinateSpace simplex_space(size_t p, const std::string& prefix = "t") {
  std::vector<Coordinate> cs;
  for (size_t i = 1; i <= p; ++i)
    cs.push_back(Coordinate{prefix + std::to_string(i), CoordKind::Barycentric, 0, 1});
  return make_space(std::move(cs));
}

// Concatenation of coordinate spaces; names must stay disjoint.
inline CoordinateSpace product(const CoordinateSpace& a, const CoordinateSpace& b) {
  std::vector<Coordinate> cs = a.coords;
  cs.insert(cs.end(), b.coords.begin(), b.coords.end());
  return make_space(std::move(cs));
}

// ---------------------------------------------------------------------------
// Rational interval sets; used for chart domains and overlap comparisons.

struct Interval {
  Rational lo, hi;
  bool empty() const { return !(lo < hi); }
  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

inline std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.empty()) return std::nullopt;
  return r;
}

// Per-coordinate union of disjoint intervals.  An empty list means the whole
// coordinate domain.
struct Domain {
  std::vector<std::vector<Interval>> per_coord;  // sized to space dim, or empty

  static Domain whole(const CoordinateSpace& s) {
    Domain d;
    d.per_coord.assign(s.dim(), {});
    return d;
  }

  bool restricts(size_t coord) const {
    return coord < per_coord.size() && !per_coord[coord].empty();
  }

  const std::vector<Interval>& intervals(size_t coord, const CoordinateSpace& s,
                                         std::vector<Interval>& scratch) const {
    if (restricts(coord)) return per_coord[coord];
    scratch = {Interval{s.at(coord).lo, s.at(coord).hi}};
    return scratch;
  }
};

// Intersect two domains coordinate-wise.  Returns nullopt when some
// coordinate's interval set becomes empty.
inline std::optional<Domain> intersect(const Domain& a, const Domain& b,
                                       const CoordinateSpace& s) {
  Domain r = Domain::whole(s);
  for (size_t c = 0; c < s.dim(); ++c) {
    if (!a.restricts(c) && !b.restricts(c)) continue;
    std::vector<Interval> sa, sb;
    const auto& ia = a.intervals(c, s, sa);
    const auto& ib = b.intervals(c, s, sb);
    std::vector<Interval> out;
    for (const auto& x : ia)
      for (const auto& y : ib)
        if (auto z = intersect(x, y)) out.push_back(*z);
    if (out.empty()) return std::nullopt;
    std::sort(out.begin(), out.end(),
              [](const Interval& u, const Interval& v) { return u.lo < v.lo; });
    r.per_coord[c] = std::move(out);
  }
  return r;
}

// An arc on the unit circle given by [lo,hi] in R; wraps mod 1 when needed.
// Arcs of length >= 1 cover the whole circle.
inline std::vector<Interval> circle_arc(Rational lo, Rational hi) {
  if (hi - lo >= 1) return {Interval{0, 1}};
  Rational l = mod1(lo);
  Rational h = l + (hi - lo);
  if (h <= 1) return {Interval{l, h}};
  return {Interval{0, h - 1}, Interval{l, 1}};
}

}  // namespace gerbes
