#include "gerbes/simplicial.hpp"

namespace gerbes {

CoordinateSpace level_space(const CoverContext& ctx, size_t p) {
  return product(simplex_space(p), ctx.space());
}

SimplicialForm zero_simplicial(const CoverContext& ctx, int degree, size_t max_level) {
  SimplicialForm s;
  s.degree = degree;
  s.max_level = max_level;
  s.values.resize(max_level + 1);
  for (size_t p = 0; p <= max_level; ++p) {
    CoordinateSpace sp = level_space(ctx, p);
    for (const auto& t : ctx.nerve.level(p))
      s.values[p].emplace(t, ExteriorForm::zero(sp, degree));
  }
  return s;
}

SimplicialForm eps_star_simplicial(const CoverContext& ctx, const ExteriorForm& a,
                                   size_t max_level) {
  SimplicialForm s = zero_simplicial(ctx, a.degree, max_level);
  s.normal_hint = true;
  for (size_t p = 0; p <= max_level; ++p) {
    ExteriorForm lifted = lift_to_simplex(a, p);
    for (auto& [t, v] : s.values[p]) v = lifted;
  }
  return s;
}

Substitution simplex_face_sub(const CoverContext& ctx, size_t p, size_t i) {
  // source: level-p space (t1..tp, M); target: level-(p-1) space (s1..s_{p-1}, M)
  CoordinateSpace src = level_space(ctx, p);
  CoordinateSpace dst = level_space(ctx, p - 1);
  Substitution sub = Substitution::identity_extend(src, dst);
  for (size_t j = 1; j <= p; ++j) {
    Poly expr;
    if (i == 0) {
      if (j == 1) {
        expr = Poly(Rational(1));
        for (size_t k = 1; k + 1 <= p; ++k) expr -= Poly::coord(static_cast<uint32_t>(k - 1));
      } else {
        expr = Poly::coord(static_cast<uint32_t>(j - 2));
      }
    } else {
      if (j < i)
        expr = Poly::coord(static_cast<uint32_t>(j - 1));
      else if (j == i)
        expr = Poly();
      else
        expr = Poly::coord(static_cast<uint32_t>(j - 2));
    }
    sub.set_poly(static_cast<uint32_t>(j - 1), expr);
  }
  return sub;
}

Substitution simplex_degeneracy_sub(const CoverContext& ctx, size_t p, size_t j) {
  // eta^j: Delta^{p+1} -> Delta^p, (s_0..s_{p+1}) |-> (.., s_j + s_{j+1}, ..)
  CoordinateSpace src = level_space(ctx, p);
  CoordinateSpace dst = level_space(ctx, p + 1);
  Substitution sub = Substitution::identity_extend(src, dst);
  auto sigma = [&](size_t a) {  // barycentric sigma_a on the target
    if (a == 0) {
      Poly e(Rational(1));
      for (size_t k = 1; k <= p + 1; ++k) e -= Poly::coord(static_cast<uint32_t>(k - 1));
      return e;
    }
    return Poly::coord(static_cast<uint32_t>(a - 1));
  };
  for (size_t k = 1; k <= p; ++k) {
    Poly expr;
    if (k < j)
      expr = sigma(k);
    else if (k == j)
      expr = sigma(j) + sigma(j + 1);
    else
      expr = sigma(k + 1);
    sub.set_poly(static_cast<uint32_t>(k - 1), expr);
  }
  return sub;
}

SimplicialForm simplicial_d(const SimplicialForm& s) {
  SimplicialForm r = s;
  r.degree = s.degree + 1;
  for (auto& level : r.values)
    for (auto& [t, v] : level) v = exterior_d(v);
  r.normal_hint = s.normal_hint;
  return r;
}

namespace {

Domain lift_domain_to_level(const CoverContext& ctx, size_t p, const Domain& d) {
  Domain r;
  r.per_coord.assign(p + ctx.space().dim(), {});
  for (size_t c = 0; c < d.per_coord.size(); ++c) r.per_coord[c + p] = d.per_coord[c];
  return r;
}

}  // namespace

SimplicialReport verify_simplicial(const CoverContext& ctx, const SimplicialForm& s) {
  SimplicialReport rep;
  for (size_t p = 1; p <= s.max_level; ++p) {
    bool ok = true;
    for (const auto& t : ctx.nerve.level(p)) {
      if (is_degenerate(t)) continue;
      Domain dom = lift_domain_to_level(ctx, p - 1, ctx.domain(t));
      for (size_t i = 0; i <= p && ok; ++i) {
        ExteriorForm lhs = pullback(simplex_face_sub(ctx, p, i), s.at(p, t));
        const ExteriorForm& rhs = s.at(p - 1, face(t, i));
        if (!equal_on(lhs, rhs, dom)) ok = false;
      }
      if (!ok) break;
    }
    rep.add("face compatibility level " + std::to_string(p), ok);
  }
  return rep;
}

SimplicialReport verify_normal(const CoverContext& ctx, const SimplicialForm& s) {
  SimplicialReport rep = verify_simplicial(ctx, s);
  for (size_t p = 0; p + 1 <= s.max_level; ++p) {
    bool ok = true;
    for (const auto& t : ctx.nerve.level(p)) {
      Domain dom = lift_domain_to_level(ctx, p + 1, ctx.domain(t));
      for (size_t j = 0; j <= p && ok; ++j) {
        ExteriorForm lhs = pullback(simplex_degeneracy_sub(ctx, p, j), s.at(p, t));
        const ExteriorForm& rhs = s.at(p + 1, degeneracy(t, j));
        if (!equal_on(lhs, rhs, dom)) ok = false;
      }
      if (!ok) break;
    }
    rep.add("degeneracy compatibility level " + std::to_string(p), ok);
  }
  return rep;
}

std::vector<CechCochain> i_delta(const CoverContext& ctx, const SimplicialForm& s) {
  std::vector<CechCochain> out;
  for (size_t p = 0; p <= s.max_level; ++p) {
    int q = s.degree - static_cast<int>(p);
    if (q < 0) break;
    CechCochain c{static_cast<int>(p), q, {}};
    for (const auto& t : ctx.nerve.level(p)) {
      ExteriorForm v = integrate_simplex(s.at(p, t), p);
      c.values.emplace(t, drop_simplex_block(v, p));
    }
    out.push_back(std::move(c));
  }
  return out;
}

ExteriorForm whitney_elementary(const CoverContext& ctx, size_t p,
                                const std::vector<uint32_t>& vertices) {
  CoordinateSpace sp = level_space(ctx, p);
  const size_t nu = vertices.size() - 1;
  auto bary = [&](uint32_t a) {  // barycentric t_a as a poly in the free coords
    if (a == 0) {
      Poly e(Rational(1));
      for (size_t k = 1; k <= p; ++k) e -= Poly::coord(static_cast<uint32_t>(k - 1));
      return e;
    }
    return Poly::coord(a - 1);
  };
  auto dbary = [&](uint32_t a) {  // dt_a as a 1-form
    ExteriorForm f(sp, 1);
    if (a == 0) {
      for (size_t k = 1; k <= p; ++k)
        f.add_term(WedgeMask(1) << (k - 1), Piecewise(sp.dim(), Poly(Rational(-1))));
    } else {
      f.add_term(WedgeMask(1) << (a - 1), Piecewise(sp.dim(), Poly(Rational(1))));
    }
    return f;
  };
  ExteriorForm w(sp, static_cast<int>(nu));
  for (size_t sdx = 0; sdx <= nu; ++sdx) {
    ExteriorForm term = ExteriorForm::scalar(sp, Piecewise(sp.dim(), bary(vertices[sdx])));
    for (size_t k = 0; k <= nu; ++k) {
      if (k == sdx) continue;
      term = wedge(term, dbary(vertices[k]));
    }
    w = (sdx % 2 == 0) ? w + term : w - term;
  }
  return w * Rational(factorial(static_cast<unsigned>(nu)));
}

SimplicialForm whitney_lift(const CoverContext& ctx, const std::vector<CechCochain>& c,
                            size_t max_level) {
  int degree = c.empty() ? 0 : c[0].p + c[0].q;
  for (const auto& comp : c)
    if (comp.p + comp.q != degree)
      throw std::invalid_argument("whitney_lift: mixed total degree");
  SimplicialForm s = zero_simplicial(ctx, degree, max_level);
  s.normal_hint = true;
  for (size_t p = 0; p <= max_level; ++p) {
    for (auto& [t, v] : s.values[p]) {
      for (const auto& comp : c) {
        size_t nu = static_cast<size_t>(comp.p);
        if (nu > p) continue;
        // all ascending vertex subsets a_0 < ... < a_nu of {0..p}
        std::vector<uint32_t> pick(nu + 1);
        std::function<void(size_t, uint32_t)> rec = [&](size_t pos, uint32_t start) {
          if (pos == nu + 1) {
            Tuple sub(nu + 1);
            for (size_t k = 0; k <= nu; ++k) sub[k] = t[pick[k]];
            const ExteriorForm& val = comp.at(sub);
            if (val.is_zero()) return;
            ExteriorForm w = whitney_elementary(ctx, p, pick);
            v = v + wedge(w, lift_to_simplex(val, p));
            return;
          }
          for (uint32_t a = start; a + (nu - pos) <= p; ++a) {
            pick[pos] = a;
            rec(pos + 1, a + 1);
          }
        };
        rec(0, 0);
      }
    }
  }
  return s;
}

DiscreteReport discrete_integral_check(const CoverContext& ctx, const SimplicialForm& s) {
  DiscreteReport rep;
  rep.discrete = true;
  const size_t n = ctx.space().dim();
  for (size_t p = 0; p <= s.max_level && rep.discrete; ++p) {
    for (const auto& t : ctx.nerve.level(p)) {
      const ExteriorForm& v = s.at(p, t);
      Domain dom = lift_domain_to_level(ctx, p, ctx.domain(t));
      for (const auto& [mask, coeff] : v.terms) {
        if (mask >> p) {  // manifold differential present
          rep.discrete = false;
          break;
        }
        for (size_t cc = p; cc < p + n; ++cc) {
          if (!zero_on(derivative(coeff, static_cast<uint32_t>(cc)), v.space, dom)) {
            rep.discrete = false;
            break;
          }
        }
        if (!rep.discrete) break;
      }
      if (!rep.discrete) break;
    }
  }
  if (!rep.discrete) return rep;
  rep.integral = true;
  for (const auto& comp : i_delta(ctx, s)) {
    for (const auto& [t, v] : comp.values) {
      if (comp.q != 0) {
        if (!zero_on(v, Domain::whole(ctx.space()))) rep.integral = false;
        continue;
      }
      if (v.is_zero()) continue;
      auto it = v.terms.find(0);
      if (it == v.terms.end()) continue;
      Rational c = eval_exact(it->second, std::vector<Rational>(ctx.space().dim(), 0));
      if (!is_integer(c)) rep.integral = false;
    }
  }
  return rep;
}

GerbeCheck verify_gerbe(const CoverContext& ctx, const SimplicialForm& lambda) {
  GerbeCheck g;
  SimplicialForm dl = simplicial_d(lambda);
  const int ell = lambda.degree;

  // alpha from the level-0 piece (t-free there)
  {
    CechCochain c0{0, ell + 1, {}};
    for (const auto& t : ctx.nerve.level(0))
      c0.values.emplace(t, drop_simplex_block(dl.at(0, t), 0));
    auto glued = glue_global(ctx, c0);
    if (glued) {
      g.alpha = *glued;
      g.lines.push_back({"alpha glues", true, 0.0, ""});
    } else {
      g.ok = false;
      g.lines.push_back({"alpha glues", false, 1.0, ""});
      return g;
    }
  }

  // beta integer cochain: I_Delta(beta) = -int_{Delta^{ell+1}} dLambda
  if (lambda.max_level >= static_cast<size_t>(ell + 1)) {
    IntegralCechCocycle z{ell + 1, {}};
    bool ok = true;
    for (const auto& t : ctx.nerve.level(ell + 1)) {
      ExteriorForm v =
          drop_simplex_block(integrate_simplex(dl.at(ell + 1, t), ell + 1), ell + 1);
      Rational c = 0;
      if (!v.is_zero()) {
        auto it = v.terms.find(0);
        if (it == v.terms.end() || v.terms.size() != 1) {
          ok = false;
          break;
        }
        c = eval_exact(it->second, std::vector<Rational>(ctx.space().dim(), 0));
      }
      if (!is_integer(-c)) {
        ok = false;
        break;
      }
      z.values.emplace(t, to_integer(-c));
    }
    g.lines.push_back({"beta integral", ok, ok ? 0.0 : 1.0, ""});
    g.ok = g.ok && ok;
    if (ok) g.beta = std::move(z);
  }

  // residual: dLambda - eps*alpha + eta*beta = 0 at every level
  if (g.alpha && g.beta) {
    SimplicialForm ea = eps_star_simplicial(ctx, *g.alpha, lambda.max_level);
    SimplicialForm eb = whitney_of_integral(ctx, *g.beta, lambda.max_level);
    bool ok = true;
    for (size_t p = 0; p <= lambda.max_level && ok; ++p) {
      for (const auto& t : ctx.nerve.level(p)) {
        if (is_degenerate(t)) continue;
        ExteriorForm resid = dl.at(p, t) - ea.at(p, t) + eb.at(p, t);
        if (!zero_on(resid, lift_domain_to_level(ctx, p, ctx.domain(t)))) {
          ok = false;
          break;
        }
      }
    }
    g.lines.push_back({"gerbe identity", ok, ok ? 0.0 : 1.0, ""});
    g.ok = g.ok && ok;
  }
  return g;
}

DeligneCocycle extract_gerbe(const CoverContext& ctx, const SimplicialForm& lambda) {
  auto check = verify_gerbe(ctx, lambda);
  if (!check.ok) throw std::domain_error("not a simplicial gerbe");
  const int ell = lambda.degree;
  auto comps = i_delta(ctx, lambda);
  DeligneCocycle dc;
  dc.level = ell;
  for (int nu = 0; nu <= ell; ++nu) dc.omega.push_back(comps.at(nu));
  dc.theta = comps.at(ell);
  for (auto& [t, v] : dc.theta.values) v = v * Rational(-1);
  return dc;
}

IntegralCechCocycle beta_of(const CoverContext& ctx, const SimplicialForm& lambda) {
  auto check = verify_gerbe(ctx, lambda);
  if (!check.ok || !check.beta) throw std::domain_error("not a simplicial gerbe");
  // internal consistency: I_Delta(beta) = delta theta
  DeligneCocycle dc = extract_gerbe(ctx, lambda);
  CechCochain dtheta = cech_delta(ctx, dc.theta);
  for (const auto& t : ctx.nerve.level(lambda.degree + 1)) {
    if (is_degenerate(t)) continue;
    auto it = check.beta->values.find(t);
    ExteriorForm expect = ExteriorForm::scalar(
        ctx.space(), Piecewise(ctx.space().dim(), Poly(Rational(it->second))));
    if (!equal_on(dtheta.at(t), expect, ctx.domain(t)))
      throw std::domain_error("beta and delta theta disagree");
  }
  return *check.beta;
}

SimplicialForm whitney_of_integral(const CoverContext& ctx, const IntegralCechCocycle& z,
                                   size_t max_level) {
  CechCochain c{z.p, 0, {}};
  for (const auto& t : ctx.nerve.level(z.p)) {
    auto it = z.values.find(t);
    Rational v = (it == z.values.end()) ? Rational(0) : Rational(it->second);
    c.values.emplace(t,
                     ExteriorForm::scalar(ctx.space(), Piecewise(ctx.space().dim(), Poly(v))));
  }
  return whitney_lift(ctx, {c}, max_level);
}

}  // namespace gerbes
