#pragma once

#include "gerbes/quadrature.hpp"
#include "gerbes/shuffle.hpp"
#include "gerbes/simplicial.hpp"

namespace gerbes {

// The data of a product fibration Y = X x Z with covers on both factors, the
// product cover on Y (base index major), and a partition of unity on the
// fibre.  Fibre coordinates come first in the total space.
struct ProductFibrationCover {
  CoverContext fibre;
  CoverContext base;
  CoverContext total;
  PartitionOfUnity pou;

  size_t m() const { return fibre.space().dim(); }
  uint32_t pair_index(uint32_t base_i, uint32_t fibre_j) const {
    return static_cast<uint32_t>(base_i * fibre.cover.size() + fibre_j);
  }
};

ProductFibrationCover make_product_fibration(const GoodCover& fibre_cover,
                                             const PartitionOfUnity& pou,
                                             const GoodCover& base_cover, size_t fibre_levels,
                                             size_t base_levels, size_t total_levels);

// A cell of the common bump grid on X together with its active bumps and
// their cumulative sums (exact polynomials valid on the cell).
struct FibreCell {
  std::vector<uint32_t> idx;
  std::vector<Interval> box;
  std::vector<uint32_t> active;
  std::vector<Poly> phi;  // active bumps restricted to the cell (fibre coords)
  std::vector<Poly> S;    // cumulative sums, S.back() = 1
};

std::vector<FibreCell> fibre_cells(const ProductFibrationCover& pf);

struct FibreOptions {
  bool parallel = true;
};

// The staircase pullback pieces on one base level/tuple: for every fibre
// cell and every (q_cell, p)-shuffle, the chart-substituted integrand on
// Delta^p x (cell x base domain).  This is the sum "per active region"
// realizing the shuffle formula; consumers integrate it over the fibre.
struct PullbackPiece {
  size_t cell = 0;
  Shuffle shuffle;
  ExteriorForm form;  // on the level-p space of the total cover
};
std::vector<PullbackPiece> phi_tilde_pullback(const ProductFibrationCover& pf,
                                              const SimplicialForm& omega, size_t p,
                                              const Tuple& base_tuple);

// Cech components I_Delta of the fibre integral, computed exactly by
// integrating the simplex block first (valid for any exact partition of
// unity).  Component nu has bidegree (nu, degree - m - nu) on the base cover.
std::vector<CechCochain> fibre_integrate_cech(const ProductFibrationCover& pf,
                                              const SimplicialForm& omega, size_t out_levels,
                                              const FibreOptions& opts = {});
// plain-loop reference implementation with identical contract
std::vector<CechCochain> fibre_integrate_cech_serial(const ProductFibrationCover& pf,
                                                     const SimplicialForm& omega,
                                                     size_t out_levels);

// Form-level fibre integral: a simplicial form on the base cover, satisfying
// face compatibility but not necessarily normal.  Exact whenever each fibre
// cell has at most two active bumps with full-range transition (circle and
// box covers); throws a capability error otherwise.
SimplicialForm fibre_integrate(const ProductFibrationCover& pf, const SimplicialForm& omega,
                               size_t out_levels, const FibreOptions& opts = {});

// classical fibre integration of a global form, as a form on the base space
ExteriorForm classical_fibre_integral(const ProductFibrationCover& pf, const ExteriorForm& a);

// ---------------------------------------------------------------------------
// Numeric backend: identical staircase construction, nested Gauss-Legendre
// quadrature for the simplex-and-fibre integrals.  Values are tracked per
// base wedge monomial and per base coefficient monomial.

struct NumericValue {
  std::map<WedgeMask, std::map<Monomial, double>> coeff;
};
struct NumericCochain {
  int p = 0;
  int q = 0;
  std::map<Tuple, NumericValue> values;
};

std::vector<NumericCochain> fibre_integrate_cech_numeric(const ProductFibrationCover& pf,
                                                         const SimplicialForm& omega,
                                                         size_t out_levels, int quad_order,
                                                         const FibreOptions& opts = {});

double numeric_vs_exact(const std::vector<CechCochain>& exact,
                        const std::vector<NumericCochain>& numeric);

// max residual of the identity I(int d w) = (-1)^m D(I(int w)) in the
// numeric backend (closed fibre)
double stokes_residual_numeric(const ProductFibrationCover& pf, const SimplicialForm& omega,
                               size_t out_levels, int quad_order);

// ---------------------------------------------------------------------------
// Validation suite.

struct StokesReport {
  bool exact_ok = false;
};
// exact Stokes check at form level: int d w = (-1)^m d int w, closed fibre
StokesReport stokes_residual(const ProductFibrationCover& pf, const SimplicialForm& omega,
                             size_t out_levels, int sign_override = 0);

struct IntegralityReport {
  bool ok = true;
  std::vector<CheckLine> lines;
};
// fibre integrals of integral forms have integral I_Delta
IntegralityReport check_integral_preserved(const ProductFibrationCover& pf,
                                           const SimplicialForm& omega, size_t out_levels);

// Pushforward of a gerbe with connection along the fibre; the output passes
// verify_deligne on the base cover.
DeligneCocycle deligne_pushforward(const ProductFibrationCover& pf, const DeligneCocycle& dc,
                                   size_t out_levels, const FibreOptions& opts = {});

}  // namespace gerbes
