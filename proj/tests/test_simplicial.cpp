#include <doctest.h>

#include <random>

#include "gerbes/simplicial.hpp"

using namespace gerbes;

namespace {

CoverContext circle_ctx(size_t max_level = 3, PouKind k = PouKind::C1Cubic) {
  auto cc = build_circle_cover(3, Rational(1, 24), k);
  return make_context(cc.cover, max_level);
}

CoverContext y_ctx(size_t max_level = 2) {
  auto c1 = build_circle_cover(3, Rational(1, 24), PouKind::C1Cubic, "x1");
  auto c2 = build_circle_cover(3, Rational(1, 24), PouKind::C1Cubic, "x2");
  auto t2 = product_cover(c1.cover, c2.cover);
  auto box = build_box_cover(box_model({"z1", "z2"}, -2, 2), 1, Rational(1, 4));
  return make_context(product_fibration_cover(t2, box.cover), max_level);
}

struct SRng {
  std::mt19937 gen;
  explicit SRng(uint32_t seed) : gen(seed) {}
  int i(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  Rational q() { return Rational(i(-3, 3), i(1, 4)); }
};

// normalized random cochain: trig-polynomial values, zero on degenerate tuples
CechCochain random_cochain(const CoverContext& ctx, int p, int q, SRng& rng) {
  CechCochain c = zero_cochain(ctx, p, q);
  const auto& s = ctx.space();
  for (auto& [t, v] : c.values) {
    if (is_degenerate(t)) continue;
    ExteriorForm f(s, q);
    std::vector<uint32_t> cs;
    for (uint32_t cc = 0; cc < s.dim(); ++cc) cs.push_back(cc);
    std::shuffle(cs.begin(), cs.end(), rng.gen);
    WedgeMask m = 0;
    for (int k = 0; k < q; ++k) m |= WedgeMask(1) << cs[k];
    Poly poly;
    Monomial mono;
    for (uint32_t cc = 0; cc < s.dim(); ++cc) {
      if (rng.i(0, 1)) continue;
      if (s.at(cc).kind == CoordKind::Periodic)
        mono.factors.push_back(
            Factor{cc, 0, rng.i(0, 1) ? Trig::Cos : Trig::Sin, static_cast<int64_t>(rng.i(1, 2))});
      else
        mono.factors.push_back(Factor{cc, static_cast<uint32_t>(rng.i(1, 2)), Trig::None, 0});
    }
    poly.add_term(mono, rng.q());
    f.add_term(m, Piecewise(s.dim(), poly));
    v = f;
  }
  return c;
}

// total differential of a cochain collection (components by Cech level)
std::vector<CechCochain> total_D_collection(const CoverContext& ctx,
                                            const std::vector<CechCochain>& c) {
  int k = c.front().p + c.front().q;
  std::vector<CechCochain> out;
  for (int nu = 0; nu <= k + 1; ++nu) {
    CechCochain comp = zero_cochain(ctx, nu, k + 1 - nu);
    for (const auto& part : c) {
      if (part.p == nu - 1) {
        CechCochain d = cech_delta(ctx, part);
        for (auto& [t, v] : comp.values) v = v + d.at(t);
      }
      if (part.p == nu) {
        CechCochain d = cochain_d(part);
        for (auto& [t, v] : comp.values)
          v = (nu % 2 == 0) ? v + d.at(t) : v - d.at(t);
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

TEST_CASE("lift of a global form is normal with zero higher components") {
  auto ctx = y_ctx(2);
  const auto& s = ctx.space();
  ExteriorForm a(s, 1);
  a.add_term(WedgeMask(1) << s.index_of("z1"), Piecewise(s.dim(), Poly::coord(s.index_of("z2"))));
  a.add_term(WedgeMask(1) << s.index_of("z2"), Piecewise(s.dim(), -Poly::coord(s.index_of("z1"))));

  auto lift = eps_star_simplicial(ctx, a, 2);
  CHECK(verify_simplicial(ctx, lift).ok);
  CHECK(verify_normal(ctx, lift).ok);

  auto comps = i_delta(ctx, lift);
  REQUIRE(comps.size() == 2);
  for (const auto& [t, v] : comps[0].values) CHECK(equal_on(v, a, ctx.domain(t)));
  CHECK(cochain_zero(ctx, comps[1]));
}

TEST_CASE("corrupting one level-1 value breaks face compatibility") {
  auto ctx = circle_ctx(2);
  const auto& s = ctx.space();
  ExteriorForm a = ExteriorForm::scalar(s, Piecewise(s.dim(), Poly::trig(0, Trig::Sin, 1)));
  auto lift = eps_star_simplicial(ctx, a, 2);
  CHECK(verify_simplicial(ctx, lift).ok);
  auto& v = lift.values[1].at(Tuple{0, 1});
  v = v + lift_to_simplex(ExteriorForm::scalar(s, Piecewise(s.dim(), Poly(Rational(1)))), 1);
  CHECK(!verify_simplicial(ctx, lift).ok);
}

TEST_CASE("Whitney lift: section of I_Delta, chain map, normality") {
  auto ctx = circle_ctx(3);
  for (uint32_t seed = 0; seed < 110; ++seed) {
    SRng rng(seed);
    // random total-degree-1 data: a (0,1) and a (1,0) component
    std::vector<CechCochain> c;
    c.push_back(random_cochain(ctx, 0, 1, rng));
    c.push_back(random_cochain(ctx, 1, 0, rng));
    auto E = whitney_lift(ctx, c, 3);

    // I_Delta(E(c)) = c, exhaustively on the cover
    auto back = i_delta(ctx, E);
    CHECK(cochain_equal(ctx, back[0], c[0]));
    CHECK(cochain_equal(ctx, back[1], c[1]));

    if (seed < 20) {
      CHECK(verify_simplicial(ctx, E).ok);
      CHECK(verify_normal(ctx, E).ok);

      // chain map: d E(c) = E(Dc)
      auto dE = simplicial_d(E);
      auto ED = whitney_lift(ctx, total_D_collection(ctx, c), 3);
      bool same = true;
      for (size_t p = 0; p <= 3 && same; ++p)
        for (const auto& t : ctx.nerve.level(p)) {
          if (is_degenerate(t)) continue;
          Domain dom;
          dom.per_coord.assign(p + ctx.space().dim(), {});
          const Domain base = ctx.domain(t);
          for (size_t cc = 0; cc < base.per_coord.size(); ++cc)
            dom.per_coord[cc + p] = base.per_coord[cc];
          if (!equal_on(dE.at(p, t), ED.at(p, t), dom)) same = false;
        }
      CHECK(same);
    }
  }
}

TEST_CASE("I_Delta is linear") {
  auto ctx = circle_ctx(2);
  SRng rng(3);
  auto a = random_cochain(ctx, 1, 0, rng);
  auto b = random_cochain(ctx, 1, 0, rng);
  auto Ea = whitney_lift(ctx, {a}, 2);
  auto Eb = whitney_lift(ctx, {b}, 2);
  // sum the lifts by hand
  auto Eab = Ea;
  for (size_t p = 0; p <= 2; ++p)
    for (auto& [t, v] : Eab.values[p]) v = v + Eb.at(p, t);
  auto back = i_delta(ctx, Eab);
  CechCochain sum = a;
  for (auto& [t, v] : sum.values) v = v + b.at(t);
  CHECK(cochain_equal(ctx, back[1], sum));
}

TEST_CASE("gerbe extraction from a lifted global form") {
  auto ctx = y_ctx(2);
  const auto& s = ctx.space();
  ExteriorForm a(s, 1);
  a.add_term(WedgeMask(1) << s.index_of("z1"), Piecewise(s.dim(), Poly::coord(s.index_of("z2"))));
  a.add_term(WedgeMask(1) << s.index_of("z2"), Piecewise(s.dim(), -Poly::coord(s.index_of("z1"))));
  auto lambda = eps_star_simplicial(ctx, a, 2);

  auto g = verify_gerbe(ctx, lambda);
  REQUIRE(g.ok);
  REQUIRE(g.alpha.has_value());
  ExteriorForm expect_alpha(s, 2);
  expect_alpha.add_term(
      (WedgeMask(1) << s.index_of("z1")) | (WedgeMask(1) << s.index_of("z2")),
      Piecewise(s.dim(), Poly(Rational(-2))));
  CHECK(equal_forms(*g.alpha, expect_alpha));
  for (const auto& [t, v] : g.beta->values) CHECK(v == 0);

  auto dc = extract_gerbe(ctx, lambda);
  CHECK(verify_deligne(ctx, dc).ok);
  CHECK(equal_forms(curvature(ctx, dc), expect_alpha));

  // beta route agrees with delta theta (both zero here)
  auto z = beta_of(ctx, lambda);
  for (const auto& [t, v] : z.values) CHECK(v == 0);

  // the zero form extracts to the trivial cocycle
  auto zl = zero_simplicial(ctx, 1, 2);
  auto dc0 = extract_gerbe(ctx, zl);
  CHECK(verify_deligne(ctx, dc0).ok);
  CHECK(curvature(ctx, dc0).is_zero());
}

TEST_CASE("discrete and integral forms") {
  auto ctx = circle_ctx(2);

  // winding cocycle: integer values on the level-1 tuples
  IntegralCechCocycle z{1, {}};
  for (const auto& t : ctx.nerve.level(1)) z.values[t] = is_degenerate(t) ? 0 : 1;
  auto w = whitney_of_integral(ctx, z, 2);
  auto rep = discrete_integral_check(ctx, w);
  CHECK(rep.discrete);
  CHECK(rep.integral);

  // scaling by 1/2 stays discrete but is no longer integral
  auto half = w;
  for (auto& level : half.values)
    for (auto& [t, v] : level) v = v * Rational(1, 2);
  auto rep2 = discrete_integral_check(ctx, half);
  CHECK(rep2.discrete);
  CHECK(!rep2.integral);

  // a manifold differential breaks discreteness
  const auto& s = ctx.space();
  ExteriorForm dxf = ExteriorForm::d_coord(s, 0);
  auto lift = eps_star_simplicial(ctx, dxf, 2);
  auto rep3 = discrete_integral_check(ctx, lift);
  CHECK(!rep3.discrete);
}
