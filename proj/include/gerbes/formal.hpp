#pragma once

#include "gerbes/form.hpp"

namespace gerbes {

// Formal fibre cohomology backend: a graded-commutative algebra with a fixed
// basis, rational structure constants, and a top-degree pairing.  Basis index
// 0 is always the unit.
struct FormalFiberModel {
  std::vector<int> degree;                                     // per basis element
  std::map<std::pair<size_t, size_t>, std::map<size_t, Rational>> mult;
  std::vector<Rational> pairing;                               // integral over the fibre
  int top = 0;

  size_t size() const { return degree.size(); }
};

// structure constants are graded-commutative and associative on all triples
bool check_structure(const FormalFiberModel& model);

// H^* of a genus-g surface with a symplectic basis a_1,b_1,..,a_g,b_g
FormalFiberModel genus_surface_model(unsigned g);
// H^* of the k-torus (exterior algebra on k degree-1 generators)
FormalFiberModel torus_model_formal(unsigned k);

// An element of Omega^*(Z) (x) H^*(X): one base form per basis index, all of
// homogeneous total degree.
struct FormalElement {
  const FormalFiberModel* model = nullptr;
  CoordinateSpace base;
  std::map<size_t, ExteriorForm> comps;

  int total_degree() const;
  bool is_zero() const;
};

FormalElement formal_zero(const FormalFiberModel& model, const CoordinateSpace& base);
FormalElement operator+(const FormalElement& a, const FormalElement& b);
FormalElement operator*(const FormalElement& a, const Rational& s);
// graded product with the Koszul sign over the base-form degree
FormalElement wedge(const FormalElement& a, const FormalElement& b);
FormalElement wedge_pow(const FormalElement& a, unsigned n);
// the fibre classes are closed; d acts on the base coefficients
FormalElement formal_d(const FormalElement& a);
// integration over the fibre: pair the top component, with the sign of
// moving the fibre block to the left
ExteriorForm fibre_integral(const FormalElement& a, size_t fibre_dim);

// A family connection datum B = sum f_a(z) gamma_a (+ base 1-form part) with
// flat fibre classes; the transgression and its fibre integral live in the
// formal backend.  Log-holonomy of a lattice vector is the linear functional
// sum lambda_a f_a(z), reported exactly.
struct FormalFamily {
  FormalElement B;
};

struct FormalInvariant {
  ExteriorForm lambda;     // fibre integral of B ^ (dB)^n
  ExteriorForm curvature;  // fibre integral of (dB)^{n+1}
};
FormalInvariant formal_family_connection(const FormalFamily& fam, unsigned n);

// log-holonomy values sum lambda_a f_a evaluated at a rational base point
Rational formal_log_holonomy(const FormalFamily& fam, const std::vector<Integer>& lattice,
                             const std::vector<Rational>& z);

}  // namespace gerbes
