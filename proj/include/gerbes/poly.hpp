#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gerbes/coords.hpp"
#include "gerbes/rational.hpp"

namespace gerbes {

// Exact scalar expressions on a chart product: polynomials with rational
// coefficients in all coordinates, times at most one factor cos(2*pi*m*u) or
// sin(2*pi*m*u) per coordinate.  Products of trig factors on the same
// coordinate are normalized to this Fourier form, so monomials are linearly
// independent functions and the representation is canonical.
//
// Calculus convention: the derivative rule is d sin_m = m cos_m du (the 2*pi
// of the analytic derivative is absorbed into the normalized angular
// differential).  Full-period integrals and quarter-turn evaluations are then
// exact rationals; see the trig helpers below.

enum class Trig : uint8_t { None = 0, Cos = 1, Sin = 2 };

struct Factor {
  uint32_t coord = 0;
  uint32_t pow = 0;   // polynomial power
  Trig trig = Trig::None;
  int64_t freq = 0;   // >= 1 when trig != None

  bool trivial() const { return pow == 0 && trig == Trig::None; }
  auto key() const { return std::tuple(coord, pow, static_cast<int>(trig), freq); }
  bool operator<(const Factor& o) const { return key() < o.key(); }
  bool operator==(const Factor& o) const { return key() == o.key(); }
};

struct Monomial {
  std::vector<Factor> factors;  // sorted by coord, at most one per coord

  bool operator<(const Monomial& o) const { return factors < o.factors; }
  bool operator==(const Monomial& o) const { return factors == o.factors; }

  const Factor* find(uint32_t coord) const {
    for (const auto& f : factors)
      if (f.coord == coord) return &f;
    return nullptr;
  }
};

class Poly {
 public:
  std::map<Monomial, Rational> terms;

  Poly() = default;
  explicit Poly(Rational c) {
    if (c != 0) terms[Monomial{}] = std::move(c);
  }

  static Poly coord(uint32_t i) {
    Poly p;
    p.terms[Monomial{{Factor{i, 1, Trig::None, 0}}}] = 1;
    return p;
  }
  static Poly trig(uint32_t i, Trig kind, int64_t freq) {
    if (kind == Trig::None || freq < 0) throw std::invalid_argument("bad trig factor");
    if (freq == 0) return kind == Trig::Cos ? Poly(Rational(1)) : Poly();
    Poly p;
    p.terms[Monomial{{Factor{i, 0, kind, freq}}}] = 1;
    return p;
  }

  bool is_zero() const { return terms.empty(); }
  bool is_constant() const {
    return terms.empty() || (terms.size() == 1 && terms.begin()->first.factors.empty());
  }
  Rational constant_value() const {
    if (terms.empty()) return 0;
    if (!is_constant()) throw std::domain_error("poly is not constant");
    return terms.begin()->second;
  }

  bool depends_on(uint32_t coord) const {
    for (const auto& [m, c] : terms)
      if (m.find(coord)) return true;
    return false;
  }
  bool has_trig(uint32_t coord) const {
    for (const auto& [m, c] : terms) {
      const Factor* f = m.find(coord);
      if (f && f->trig != Trig::None) return true;
    }
    return false;
  }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto it = terms.find(m);
    if (it == terms.end()) {
      terms.emplace(m, c);
    } else {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [m, c] : o.terms) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [m, c] : o.terms) add_term(m, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Rational& s) {
    Poly r;
    if (s == 0) return r;
    for (const auto& [m, c] : a.terms) r.terms[m] = c * s;
    return r;
  }
  friend Poly operator-(const Poly& a) { return a * Rational(-1); }

  bool operator==(const Poly& o) const { return terms == o.terms; }
};

namespace detail {

// Product of two factors on the same coordinate.  Returns up to two
// (factor-or-constant, coefficient) pairs via product-to-sum identities.
inline void mul_factor(const Factor& a, const Factor& b,
                       std::vector<std::pair<std::optional<Factor>, Rational>>& out) {
  uint32_t pow = a.pow + b.pow;
  auto emit = [&](Trig t, int64_t m, Rational c) {
    if (t != Trig::None && m < 0) {
      m = -m;
      if (t == Trig::Sin) c = -c;
    }
    if (t != Trig::None && m == 0) {
      if (t == Trig::Sin) return;  // sin 0 = 0
      t = Trig::None;
    }
    Factor f{a.coord, pow, t, t == Trig::None ? 0 : m};
    if (f.trivial())
      out.emplace_back(std::nullopt, std::move(c));
    else
      out.emplace_back(f, std::move(c));
  };
  if (a.trig == Trig::None && b.trig == Trig::None) {
    emit(Trig::None, 0, 1);
  } else if (b.trig == Trig::None) {
    emit(a.trig, a.freq, 1);
  } else if (a.trig == Trig::None) {
    emit(b.trig, b.freq, 1);
  } else {
    int64_t m = a.freq, k = b.freq;
    Rational half(1, 2);
    if (a.trig == Trig::Cos && b.trig == Trig::Cos) {
      emit(Trig::Cos, m + k, half);
      emit(Trig::Cos, m - k, half);
    } else if (a.trig == Trig::Sin && b.trig == Trig::Sin) {
      emit(Trig::Cos, m - k, half);
      emit(Trig::Cos, m + k, -half);
    } else if (a.trig == Trig::Sin && b.trig == Trig::Cos) {
      emit(Trig::Sin, m + k, half);
      emit(Trig::Sin, m - k, half);
    } else {  // cos * sin
      emit(Trig::Sin, m + k, half);
      emit(Trig::Sin, k - m, half);
    }
  }
}

inline void mul_mono(const Monomial& a, const Monomial& b,
                     std::vector<std::pair<Monomial, Rational>>& out) {
  std::vector<std::pair<Monomial, Rational>> acc{{Monomial{}, Rational(1)}};
  size_t i = 0, j = 0;
  auto push_plain = [&](const Factor& f) {
    for (auto& [m, c] : acc) m.factors.push_back(f);
  };
  while (i < a.factors.size() || j < b.factors.size()) {
    if (j >= b.factors.size() ||
        (i < a.factors.size() && a.factors[i].coord < b.factors[j].coord)) {
      push_plain(a.factors[i++]);
    } else if (i >= a.factors.size() || b.factors[j].coord < a.factors[i].coord) {
      push_plain(b.factors[j++]);
    } else {
      std::vector<std::pair<std::optional<Factor>, Rational>> prods;
      mul_factor(a.factors[i++], b.factors[j++], prods);
      std::vector<std::pair<Monomial, Rational>> next;
      for (const auto& [m, c] : acc)
        for (const auto& [f, pc] : prods) {
          Monomial nm = m;
          if (f) nm.factors.push_back(*f);
          next.emplace_back(std::move(nm), c * pc);
        }
      acc = std::move(next);
    }
  }
  for (auto& p : acc) out.push_back(std::move(p));
}

}  // namespace detail

inline Poly operator*(const Poly& a, const Poly& b) {
  Poly r;
  std::vector<std::pair<Monomial, Rational>> prods;
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) {
      prods.clear();
      detail::mul_mono(ma, mb, prods);
      for (const auto& [m, c] : prods) r.add_term(m, ca * cb * c);
    }
  return r;
}

inline Poly pow(const Poly& a, unsigned n) {
  Poly r(Rational(1));
  for (unsigned i = 0; i < n; ++i) r = r * a;
  return r;
}

// Formal partial derivative; see the convention note at the top of the file.
inline Poly derivative(const Poly& p, uint32_t coord) {
  Poly r;
  for (const auto& [m, c] : p.terms) {
    for (size_t k = 0; k < m.factors.size(); ++k) {
      const Factor& f = m.factors[k];
      if (f.coord != coord) continue;
      if (f.pow >= 1) {
        Monomial nm = m;
        nm.factors[k].pow -= 1;
        if (nm.factors[k].trivial()) nm.factors.erase(nm.factors.begin() + k);
        r.add_term(nm, c * Rational(f.pow));
      }
      if (f.trig == Trig::Sin) {
        Monomial nm = m;
        nm.factors[k].trig = Trig::Cos;
        r.add_term(nm, c * Rational(f.freq));
      } else if (f.trig == Trig::Cos) {
        Monomial nm = m;
        nm.factors[k].trig = Trig::Sin;
        r.add_term(nm, -c * Rational(f.freq));
      }
    }
  }
  return r;
}

// cos/sin(2 pi q) for rational q, exact; only quarter turns are rational.
inline std::optional<Rational> trig_exact(Trig kind, const Rational& q) {
  Rational u = mod1(q) * 4;  // quarter turns
  if (!is_integer(u)) return std::nullopt;
  int k = static_cast<int>(to_integer(u) % 4);
  static const int cosv[4] = {1, 0, -1, 0};
  static const int sinv[4] = {0, 1, 0, -1};
  return Rational(kind == Trig::Cos ? cosv[k] : sinv[k]);
}

// Exact evaluation at a rational point.  Fails on non-quarter-turn trig.
inline Rational eval_exact(const Poly& p, const std::vector<Rational>& x) {
  Rational r = 0;
  for (const auto& [m, c] : p.terms) {
    Rational t = c;
    for (const auto& f : m.factors) {
      const Rational& u = x.at(f.coord);
      for (uint32_t i = 0; i < f.pow; ++i) t *= u;
      if (f.trig != Trig::None) {
        auto v = trig_exact(f.trig, Rational(f.freq) * u);
        if (!v) throw std::domain_error("trig evaluation at non-quarter-turn point");
        t *= *v;
      }
    }
    r += t;
  }
  return r;
}

inline double eval_double(const Poly& p, const std::vector<double>& x) {
  double r = 0;
  for (const auto& [m, c] : p.terms) {
    double t = to_double(c);
    for (const auto& f : m.factors) {
      double u = x.at(f.coord);
      for (uint32_t i = 0; i < f.pow; ++i) t *= u;
      if (f.trig == Trig::Cos) t *= std::cos(2 * M_PI * f.freq * u);
      if (f.trig == Trig::Sin) t *= std::sin(2 * M_PI * f.freq * u);
    }
    r += t;
  }
  return r;
}

// Antiderivative in `coord`.  Trig factors integrate by parts under the
// normalized rule (primitive of sin_m is -cos_m/m).
inline Poly antiderivative(const Poly& p, uint32_t coord) {
  Poly r;
  for (const auto& [m, c] : p.terms) {
    Monomial rest;
    Factor f{coord, 0, Trig::None, 0};
    for (const auto& g : m.factors) {
      if (g.coord == coord)
        f = g;
      else
        rest.factors.push_back(g);
    }

    // antiderivative of u^a * trig as a poly in u
    Poly au;
    if (f.trig == Trig::None) {
      Monomial mu;
      mu.factors.push_back(Factor{coord, f.pow + 1, Trig::None, 0});
      au.add_term(mu, Rational(1, f.pow + 1));
    } else {
      // A(u^a sin_m) = -u^a cos_m/m + (a/m) A(u^{a-1} cos_m)
      // A(u^a cos_m) =  u^a sin_m/m - (a/m) A(u^{a-1} sin_m)
      uint32_t a = f.pow;
      Trig t = f.trig;
      Rational coeff = 1;
      while (true) {
        Monomial mu;
        Factor nf{coord, a, t == Trig::Sin ? Trig::Cos : Trig::Sin, f.freq};
        if (!nf.trivial()) mu.factors.push_back(nf);
        if (t == Trig::Sin)
          au.add_term(mu, -coeff / Rational(f.freq));
        else
          au.add_term(mu, coeff / Rational(f.freq));
        if (a == 0) break;
        coeff = (t == Trig::Sin ? coeff : -coeff) * Rational(a) / Rational(f.freq);
        t = (t == Trig::Sin) ? Trig::Cos : Trig::Sin;
        a -= 1;
      }
    }
    Poly restp;
    restp.add_term(rest, c);
    r += restp * au;
  }
  return r;
}

// Substitute coord -> value (exact rational), lowering the dependence.
inline Poly substitute_const(const Poly& p, uint32_t coord, const Rational& v) {
  Poly r;
  for (const auto& [m, c] : p.terms) {
    Rational coeff = c;
    Monomial rest;
    bool dead = false;
    for (const auto& f : m.factors) {
      if (f.coord != coord) {
        rest.factors.push_back(f);
        continue;
      }
      for (uint32_t i = 0; i < f.pow; ++i) coeff *= v;
      if (f.trig != Trig::None) {
        auto t = trig_exact(f.trig, Rational(f.freq) * v);
        if (!t) throw std::domain_error("substitute_const: non-quarter-turn trig value");
        coeff *= *t;
        if (coeff == 0) dead = true;
      }
    }
    if (!dead) r.add_term(rest, coeff);
  }
  return r;
}

// Definite integral over [lo,hi] in `coord`; exact, requires quarter-turn
// endpoints for any trig frequency present in that coordinate.
inline Poly integrate_interval(const Poly& p, uint32_t coord, const Rational& lo,
                               const Rational& hi) {
  Poly A = antiderivative(p, coord);
  return substitute_const(A, coord, hi) - substitute_const(A, coord, lo);
}

// Substitute coord -> q (a polynomial/trig expression, possibly in another
// space's coordinates).  Trig factors in `coord` require q to be affine with
// integer slope in a single coordinate and quarter-turn constant part.
inline Poly substitute(const Poly& p, uint32_t coord, const Poly& q) {
  // decompose q = k*u + c when possible (for trig substitution)
  auto affine_int = [&]() -> std::optional<std::tuple<int64_t, uint32_t, Rational>> {
    int64_t k = 0;
    uint32_t u = 0;
    Rational c = 0;
    for (const auto& [m, co] : q.terms) {
      if (m.factors.empty()) {
        c = co;
      } else if (m.factors.size() == 1 && m.factors[0].pow == 1 &&
                 m.factors[0].trig == Trig::None) {
        if (k != 0) return std::nullopt;  // more than one linear coord
        if (!is_integer(co)) return std::nullopt;
        k = static_cast<int64_t>(to_integer(co).convert_to<long long>());
        u = m.factors[0].coord;
      } else {
        return std::nullopt;
      }
    }
    return std::tuple(k, u, c);
  };

  Poly r;
  for (const auto& [m, c] : p.terms) {
    Poly term(c);
    for (const auto& f : m.factors) {
      if (f.coord != coord) {
        Poly keep;
        Monomial mm;
        mm.factors.push_back(f);
        keep.add_term(mm, 1);
        term = term * keep;
        continue;
      }
      if (f.pow > 0) term = term * pow(q, f.pow);
      if (f.trig != Trig::None) {
        auto aff = affine_int();
        if (!aff) throw std::domain_error("trig substitution requires affine integer map");
        auto [k, u, cst] = *aff;
        auto cc = trig_exact(Trig::Cos, Rational(f.freq) * cst);
        auto ss = trig_exact(Trig::Sin, Rational(f.freq) * cst);
        if (!cc || !ss)
          throw std::domain_error("trig substitution constant is not a quarter turn");
        int64_t mk = f.freq * k;
        // sin(m(ku+c)) = sin(mku)cos(mc) + cos(mku)sin(mc), etc.
        Poly cosmk = (mk == 0) ? Poly(Rational(1))
                               : Poly::trig(u, Trig::Cos, std::abs(mk));
        Poly sinmk = (mk == 0) ? Poly() : Poly::trig(u, Trig::Sin, std::abs(mk));
        if (mk < 0) sinmk = -sinmk;
        Poly val;
        if (f.trig == Trig::Sin)
          val = sinmk * *cc + cosmk * *ss;
        else
          val = cosmk * *cc - sinmk * *ss;
        term = term * val;
      }
    }
    r += term;
  }
  return r;
}

}  // namespace gerbes
