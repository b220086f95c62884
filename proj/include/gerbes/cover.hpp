#pragma once

#include <string>
#include <vector>

#include "gerbes/form.hpp"

namespace gerbes {

// Manifold models are chart products read off the coordinate space: a
// periodic coordinate is a circle factor, an affine coordinate a box factor.
// Orientation is +1, the coordinate order.
struct ManifoldModel {
  CoordinateSpace space;

  size_t dim() const { return space.dim(); }
  bool operator==(const ManifoldModel& o) const { return space == o.space; }
};

inline ManifoldModel circle_model(const std::string& coord = "x") {
  return ManifoldModel{make_space({periodic_coord(coord)})};
}
inline ManifoldModel torus_model(size_t k, const std::string& prefix = "x") {
  std::vector<Coordinate> cs;
  for (size_t j = 1; j <= k; ++j) cs.push_back(periodic_coord(prefix + std::to_string(j)));
  return ManifoldModel{make_space(std::move(cs))};
}
inline ManifoldModel box_model(const std::vector<std::string>& names, Rational lo, Rational hi) {
  std::vector<Coordinate> cs;
  for (const auto& n : names) cs.push_back(affine_coord(n, lo, hi));
  return ManifoldModel{make_space(std::move(cs))};
}
inline ManifoldModel product(const ManifoldModel& a, const ManifoldModel& b) {
  return ManifoldModel{product(a.space, b.space)};
}

struct GoodCover {
  ManifoldModel model;
  std::vector<Domain> elements;  // indexed open sets, total order = index order
  std::string id;

  size_t size() const { return elements.size(); }
};

struct PartitionOfUnity {
  std::vector<Piecewise> phi;  // one per cover element, on model.space
  std::string id;              // "c1cubic" | "pl"
  Cont cont = Cont::C1;
};

enum class PouKind { C1Cubic, PL };

struct CircleCover {
  GoodCover cover;
  PartitionOfUnity pou;
};

// n arcs of length 1/n + 2*delta centered at j/n.  Requires n >= 3 and
// 0 < delta < 1/(2n) so that only consecutive arcs meet and all triple
// intersections are empty; otherwise throws a bad-cover error.
CircleCover build_circle_cover(unsigned n, const Rational& delta,
                               PouKind pou = PouKind::C1Cubic,
                               const std::string& coord = "x");

// Box cover along the first axis of a box model: `parts` overlapping slabs
// with the given rational overlap; parts = 1 gives the single-chart cover.
CircleCover build_box_cover(const ManifoldModel& box, unsigned parts, const Rational& overlap,
                            PouKind pou = PouKind::C1Cubic);

// Symmetric product cover: model = a.model x b.model, elements (i,j) ordered
// lexicographically with i major.
GoodCover product_cover(const GoodCover& a, const GoodCover& b);
PartitionOfUnity product_pou(const GoodCover& a, const PartitionOfUnity& pa,
                             const GoodCover& b, const PartitionOfUnity& pb);

// Cover of a product fibration Y = X x Z (fibre coordinates first): elements
// indexed by pairs (i,j) with the base index i major and element U'_j x U_i.
GoodCover product_fibration_cover(const GoodCover& fibre, const GoodCover& base);

// Nonempty-intersection domain of a tuple of element indices (empty optional
// when the intersection is empty).
std::optional<Domain> tuple_domain(const GoodCover& c, const std::vector<uint32_t>& tuple);

// Good-cover validation: every listed pairwise/triple intersection nonempty
// is connected and contractible; for circle covers, triples must be empty.
struct CoverReport {
  bool good = true;
  std::vector<std::string> problems;
};
CoverReport validate_good_cover(const GoodCover& c);

// Partition-of-unity validation: sum = 1 as an exact piecewise identity,
// support containment, nonnegativity on a rational sample grid.
CoverReport verify_pou(const GoodCover& c, const PartitionOfUnity& pou, int samples = 257);

}  // namespace gerbes
