#include "gerbes/formal.hpp"

namespace gerbes {

namespace {

std::map<size_t, Rational> basis_mult(const FormalFiberModel& m, size_t i, size_t j) {
  if (i == 0) return {{j, Rational(1)}};
  if (j == 0) return {{i, Rational(1)}};
  auto it = m.mult.find({i, j});
  if (it == m.mult.end()) return {};
  return it->second;
}

}  // namespace

bool check_structure(const FormalFiberModel& m) {
  const size_t n = m.size();
  // graded commutativity
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      auto ij = basis_mult(m, i, j);
      auto ji = basis_mult(m, j, i);
      Rational sign = (m.degree[i] * m.degree[j]) % 2 == 0 ? 1 : -1;
      for (const auto& [k, c] : ij) {
        auto it = ji.find(k);
        Rational other = (it == ji.end()) ? Rational(0) : it->second;
        if (other * sign != c) return false;
      }
      for (const auto& [k, c] : ji) {
        if (ij.find(k) == ij.end() && c != 0) return false;
      }
    }
  // associativity on all triples
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < n; ++k) {
        std::map<size_t, Rational> left, right;
        for (const auto& [a, c] : basis_mult(m, i, j))
          for (const auto& [b, c2] : basis_mult(m, a, k)) left[b] += c * c2;
        for (const auto& [a, c] : basis_mult(m, j, k))
          for (const auto& [b, c2] : basis_mult(m, i, a)) right[b] += c * c2;
        for (const auto& [b, c] : left)
          if (right[b] != c) return false;
        for (const auto& [b, c] : right)
          if (left[b] != c) return false;
      }
  return true;
}

FormalFiberModel genus_surface_model(unsigned g) {
  FormalFiberModel m;
  m.top = 2;
  m.degree.push_back(0);  // unit
  for (unsigned i = 0; i < 2 * g; ++i) m.degree.push_back(1);
  m.degree.push_back(2);  // top class
  const size_t T = m.degree.size() - 1;
  m.pairing.assign(m.degree.size(), 0);
  m.pairing[T] = 1;
  // a_i = 1 + 2i, b_i = 2 + 2i; a_i b_i = T, b_i a_i = -T
  for (unsigned i = 0; i < g; ++i) {
    size_t a = 1 + 2 * i, b = 2 + 2 * i;
    m.mult[{a, b}] = {{T, Rational(1)}};
    m.mult[{b, a}] = {{T, Rational(-1)}};
  }
  return m;
}

FormalFiberModel torus_model_formal(unsigned k) {
  // basis indexed by subsets of {0..k-1}, ordered by (popcount, value)
  std::vector<uint32_t> subsets;
  for (uint32_t s = 0; s < (1u << k); ++s) subsets.push_back(s);
  std::sort(subsets.begin(), subsets.end(), [](uint32_t a, uint32_t b) {
    int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  std::map<uint32_t, size_t> index;
  FormalFiberModel m;
  m.top = static_cast<int>(k);
  for (size_t i = 0; i < subsets.size(); ++i) {
    index[subsets[i]] = i;
    m.degree.push_back(__builtin_popcount(subsets[i]));
  }
  m.pairing.assign(subsets.size(), 0);
  m.pairing[index[(1u << k) - 1]] = 1;
  for (uint32_t a : subsets)
    for (uint32_t b : subsets) {
      if (a == 0 || b == 0) continue;
      if (a & b) continue;
      // sign of merging the two ascending blocks
      int inv = 0;
      for (uint32_t i = 0; i < k; ++i)
        if ((a >> i) & 1) inv += __builtin_popcount(b & ((1u << i) - 1));
      m.mult[{index[a], index[b]}] = {{index[a | b], Rational(inv % 2 == 0 ? 1 : -1)}};
    }
  return m;
}

int FormalElement::total_degree() const {
  for (const auto& [i, f] : comps)
    if (!f.is_zero()) return model->degree[i] + f.degree;
  return 0;
}

bool FormalElement::is_zero() const {
  for (const auto& [i, f] : comps)
    if (!f.is_zero()) return false;
  return true;
}

FormalElement formal_zero(const FormalFiberModel& model, const CoordinateSpace& base) {
  return FormalElement{&model, base, {}};
}

FormalElement operator+(const FormalElement& a, const FormalElement& b) {
  FormalElement r = a;
  for (const auto& [i, f] : b.comps) {
    auto it = r.comps.find(i);
    if (it == r.comps.end())
      r.comps.emplace(i, f);
    else
      it->second = it->second + f;
  }
  return r;
}

FormalElement operator*(const FormalElement& a, const Rational& s) {
  FormalElement r = a;
  for (auto& [i, f] : r.comps) f = f * s;
  return r;
}

FormalElement wedge(const FormalElement& a, const FormalElement& b) {
  FormalElement r = formal_zero(*a.model, a.base);
  for (const auto& [i, fi] : a.comps)
    for (const auto& [j, fj] : b.comps) {
      if (fi.is_zero() || fj.is_zero()) continue;
      auto prod = basis_mult(*a.model, i, j);
      if (prod.empty()) continue;
      // Koszul sign: the fibre class gamma_i passes the base form fj
      Rational sign = (a.model->degree[i] * fj.degree) % 2 == 0 ? 1 : -1;
      ExteriorForm base_part = wedge(fi, fj) * sign;
      if (base_part.is_zero()) continue;
      for (const auto& [k, c] : prod) {
        auto it = r.comps.find(k);
        ExteriorForm add = base_part * c;
        if (it == r.comps.end())
          r.comps.emplace(k, add);
        else
          it->second = it->second + add;
      }
    }
  return r;
}

FormalElement wedge_pow(const FormalElement& a, unsigned n) {
  FormalElement r = formal_zero(*a.model, a.base);
  r.comps.emplace(0, ExteriorForm::scalar(a.base, Piecewise(a.base.dim(), Poly(Rational(1)))));
  for (unsigned i = 0; i < n; ++i) r = wedge(r, a);
  return r;
}

FormalElement formal_d(const FormalElement& a) {
  // base-form-left convention: d(f ^ gamma) = df ^ gamma since d gamma = 0
  FormalElement r = a;
  for (auto& [i, f] : r.comps) f = exterior_d(f);
  return r;
}

ExteriorForm fibre_integral(const FormalElement& a, size_t fibre_dim) {
  ExteriorForm r(a.base, a.total_degree() - static_cast<int>(fibre_dim));
  bool any = false;
  for (const auto& [i, f] : a.comps) {
    if (a.model->pairing[i] == 0 || f.is_zero()) continue;
    // left-integration: move the fibre block in front of the base form
    Rational sign = (f.degree * static_cast<int>(fibre_dim)) % 2 == 0 ? 1 : -1;
    r = any ? r + f * (a.model->pairing[i] * sign) : f * (a.model->pairing[i] * sign);
    any = true;
  }
  if (!any) return ExteriorForm::zero(a.base, std::max(0, r.degree));
  return r;
}

FormalInvariant formal_family_connection(const FormalFamily& fam, unsigned n) {
  const FormalElement& B = fam.B;
  FormalElement dB = formal_d(B);
  FormalElement lambda = wedge(B, wedge_pow(dB, n));
  FormalElement top = wedge_pow(dB, n + 1);
  size_t m = static_cast<size_t>(B.model->top);
  return FormalInvariant{fibre_integral(lambda, m), fibre_integral(top, m)};
}

Rational formal_log_holonomy(const FormalFamily& fam, const std::vector<Integer>& lattice,
                             const std::vector<Rational>& z) {
  // pair the degree-1 components f_a with the lattice vector
  Rational r = 0;
  size_t a = 0;
  for (const auto& [i, f] : fam.B.comps) {
    if (fam.B.model->degree[i] != 1) continue;
    if (a >= lattice.size()) break;
    if (!f.is_zero()) {
      auto it = f.terms.find(0);
      if (it != f.terms.end()) r += Rational(lattice[a]) * eval_exact(it->second, z);
    }
    ++a;
  }
  return r;
}

}  // namespace gerbes
