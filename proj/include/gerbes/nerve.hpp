#pragma once

#include "gerbes/cover.hpp"

namespace gerbes {

// Ordered tuples (i_0 <= ... <= i_p) of cover indices with nonempty
// intersection.  Degenerate tuples (repeated indices) are kept at all levels
// to support the degeneracy operators; the nondegenerate ones are a filter.
using Tuple = std::vector<uint32_t>;

inline bool is_degenerate(const Tuple& t) {
  for (size_t i = 1; i < t.size(); ++i)
    if (t[i] == t[i - 1]) return true;
  return false;
}

// face operator: delete the i-th index
inline Tuple face(const Tuple& t, size_t i) {
  if (i >= t.size()) throw std::out_of_range("face index out of range");
  Tuple r = t;
  r.erase(r.begin() + i);
  return r;
}

// degeneracy operator: repeat the j-th index
inline Tuple degeneracy(const Tuple& t, size_t j) {
  if (j >= t.size()) throw std::out_of_range("degeneracy index out of range");
  Tuple r = t;
  r.insert(r.begin() + j, t[j]);
  return r;
}

struct Nerve {
  std::vector<std::vector<Tuple>> levels;  // levels[p] = level-p tuples
  int nondegenerate_dim = 0;

  size_t max_level() const { return levels.empty() ? 0 : levels.size() - 1; }
  const std::vector<Tuple>& level(size_t p) const { return levels.at(p); }
};

Nerve build_nerve(const GoodCover& cover, size_t max_level);

// A cover together with its nerve and (optionally) a partition of unity;
// the shared context for Cech-level computations.
struct CoverContext {
  GoodCover cover;
  Nerve nerve;

  Domain domain(const Tuple& t) const {
    auto d = tuple_domain(cover, t);
    if (!d) throw std::domain_error("tuple with empty intersection");
    return *d;
  }
  const CoordinateSpace& space() const { return cover.model.space; }
};

CoverContext make_context(GoodCover cover, size_t max_level);

}  // namespace gerbes
