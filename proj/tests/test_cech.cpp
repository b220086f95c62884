#include <doctest.h>

#include <random>

#include "gerbes/deligne.hpp"

using namespace gerbes;

namespace {

// the flat torus family space: T^2 fibre times plane base
CoverContext t2_box_context(size_t max_level = 3) {
  auto c1 = build_circle_cover(3, Rational(1, 24), PouKind::C1Cubic, "x1");
  auto c2 = build_circle_cover(3, Rational(1, 24), PouKind::C1Cubic, "x2");
  auto t2 = product_cover(c1.cover, c2.cover);
  auto box = build_box_cover(box_model({"z1", "z2"}, -2, 2), 1, Rational(1, 4));
  return make_context(product_fibration_cover(t2, box.cover), max_level);
}

ExteriorForm char_form(const CoordinateSpace& s) {
  // z2 dz1 - z1 dz2 in whatever space contains z1,z2
  auto z1 = static_cast<uint32_t>(s.index_of("z1"));
  auto z2 = static_cast<uint32_t>(s.index_of("z2"));
  ExteriorForm r(s, 1);
  r.add_term(WedgeMask(1) << z1, Piecewise(s.dim(), Poly::coord(z2)));
  r.add_term(WedgeMask(1) << z2, Piecewise(s.dim(), -Poly::coord(z1)));
  return r;
}

struct CRng {
  std::mt19937 gen;
  explicit CRng(uint32_t seed) : gen(seed) {}
  int i(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  Rational q() { return Rational(i(-3, 3), i(1, 4)); }
};

// random (p,q) cochain with trig-polynomial values on a context
CechCochain random_cochain(const CoverContext& ctx, int p, int q, CRng& rng) {
  CechCochain c = zero_cochain(ctx, p, q);
  const auto& s = ctx.space();
  for (auto& [t, v] : c.values) {
    ExteriorForm f(s, q);
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<uint32_t> cs;
      for (uint32_t cc = 0; cc < s.dim(); ++cc) cs.push_back(cc);
      std::shuffle(cs.begin(), cs.end(), rng.gen);
      WedgeMask m = 0;
      for (int k = 0; k < q; ++k) m |= WedgeMask(1) << cs[k];
      Poly poly;
      Monomial mono;
      for (uint32_t cc = 0; cc < s.dim(); ++cc) {
        if (rng.i(0, 2)) continue;
        if (s.at(cc).kind == CoordKind::Periodic)
          mono.factors.push_back(Factor{cc, 0, rng.i(0, 1) ? Trig::Cos : Trig::Sin,
                                        static_cast<int64_t>(rng.i(1, 2))});
        else
          mono.factors.push_back(Factor{cc, static_cast<uint32_t>(rng.i(1, 2)), Trig::None, 0});
      }
      poly.add_term(mono, rng.q());
      f.add_term(m, Piecewise(s.dim(), poly));
    }
    v = f;
  }
  return c;
}

}  // namespace

TEST_CASE("coboundary basics") {
  auto ctx = t2_box_context(3);
  CRng rng(5);

  // delta of a (0,q) cochain on a pair is the difference of restrictions
  auto c = random_cochain(ctx, 0, 1, rng);
  auto dxc = cech_delta(ctx, c);
  for (const auto& t : ctx.nerve.level(1)) {
    if (is_degenerate(t)) continue;
    auto expect = c.at(Tuple{t[1]}) - c.at(Tuple{t[0]});
    CHECK(equal_on(dxc.at(t), expect, ctx.domain(t)));
  }

  // constants die on connected overlaps
  auto ones = zero_cochain(ctx, 0, 0);
  for (auto& [t, v] : ones.values)
    v = ExteriorForm::scalar(ctx.space(), Piecewise(ctx.space().dim(), Poly(Rational(1))));
  CHECK(cochain_zero(ctx, cech_delta(ctx, ones)));
}

TEST_CASE("property: delta^2 = 0 and D^2 = 0 on randomized cochains") {
  auto cc = build_circle_cover(3, Rational(1, 24));
  auto box = build_box_cover(box_model({"z1", "z2"}, -2, 2), 1, Rational(1, 4));
  auto ctx = make_context(product_fibration_cover(cc.cover, box.cover), 3);
  for (uint32_t seed = 0; seed < 110; ++seed) {
    CRng rng(seed);
    auto c = random_cochain(ctx, 0, 1, rng);
    CHECK(cochain_zero(ctx, cech_delta(ctx, cech_delta(ctx, c))));
    // D^2 = 0: the (p+2,q), (p+1,q+1), (p,q+2) components all vanish
    auto D1 = total_D(ctx, c);
    auto Ddelta = total_D(ctx, D1.delta_part);
    auto Dd = total_D(ctx, D1.d_part);
    CHECK(cochain_zero(ctx, Ddelta.delta_part));
    CHECK(cochain_zero(ctx, cochain_d(D1.d_part)));
    // mixed component: delta(d part) + d(delta part) with the sign built in
    bool mixed_ok = true;
    for (const auto& t : ctx.nerve.level(1)) {
      if (is_degenerate(t)) continue;
      auto v = Dd.delta_part.at(t) + Ddelta.d_part.at(t);
      if (!zero_on(v, ctx.domain(t))) mixed_ok = false;
    }
    CHECK(mixed_ok);
  }
}

TEST_CASE("epsilon_star: restrictions of a global form") {
  auto ctx = t2_box_context(2);
  auto a = char_form(ctx.space());
  auto c = epsilon_star(ctx, a);
  CHECK(cochain_zero(ctx, cech_delta(ctx, c)));
  auto glued = glue_global(ctx, c);
  REQUIRE(glued.has_value());
  CHECK(equal_forms(*glued, a));
  CHECK(cochain_zero(ctx, epsilon_star(ctx, ExteriorForm::zero(ctx.space(), 1))));
}

TEST_CASE("trivial-gerbe connection from a global form and its curvature") {
  auto ctx = t2_box_context(3);
  auto w = char_form(ctx.space());
  auto dc = global_form_cocycle(ctx, w);
  auto rep = verify_deligne(ctx, dc);
  for (const auto& line : rep.checks)
    if (!line.pass) MESSAGE(line.name);
  CHECK(rep.ok);

  //  curvature = -2 dz1 dz2
  auto F = curvature(ctx, dc);
  const auto& s = ctx.space();
  ExteriorForm expect(s, 2);
  WedgeMask m = (WedgeMask(1) << s.index_of("z1")) | (WedgeMask(1) << s.index_of("z2"));
  expect.add_term(m, Piecewise(s.dim(), Poly(Rational(-2))));
  CHECK(equal_forms(F, expect));

  // flat when the global form is closed
  ExteriorForm closed(s, 1);
  closed.add_term(WedgeMask(1) << s.index_of("z1"), Piecewise(s.dim(), Poly(Rational(3))));
  CHECK(is_flat(ctx, global_form_cocycle(ctx, closed)));

  // trivial gerbe has zero Bockstein class
  auto z = bockstein_class(ctx, dc);
  for (const auto& [t, v] : z.values) CHECK(v == 0);

  // a randomized non-cocycle is flagged
  CRng rng(11);
  auto bad = dc;
  bad.omega[1] = random_cochain(ctx, 1, 0, rng);
  CHECK(!verify_deligne(ctx, bad).ok);
}

TEST_CASE("periods of closed forms on the torus") {
  auto s = make_space({periodic_coord("u"), periodic_coord("v")});
  // -d(theta): period -1 over the circle
  ExteriorForm a(s, 1);
  a.add_term(1, Piecewise(2, Poly(Rational(-1))));
  auto tab = periods(a);
  REQUIRE(tab.entries.size() == 2);
  CHECK(tab.entries[0].second == Rational(-1));
  CHECK(tab.entries[1].second == Rational(0));

  // normalized volume form of T^2
  ExteriorForm vol(s, 2);
  vol.add_term(0b11, Piecewise(2, Poly(Rational(1))));
  auto tab2 = periods(vol);
  REQUIRE(tab2.entries.size() == 1);
  CHECK(tab2.entries[0].second == Rational(1));

  // exact forms have zero periods
  ExteriorForm h = ExteriorForm::scalar(s, Piecewise(2, Poly::trig(0, Trig::Sin, 1)));
  auto tab3 = periods(exterior_d(h));
  for (const auto& [cs, val] : tab3.entries) CHECK(val == 0);

  // non-closed input rejected
  ExteriorForm bad(s, 1);
  bad.add_term(1, Piecewise(2, Poly::trig(1, Trig::Sin, 1)));
  CHECK_THROWS_AS(periods(bad), std::domain_error);
}

TEST_CASE("chains: boundaries and the fundamental cycles") {
  auto cyc = circle_fundamental_cycle(3);
  auto bd = chain_boundary(cyc);
  std::map<Tuple, Integer> sums;
  for (const auto& [t, c] : bd.terms) sums[t] += c;
  for (const auto& [t, c] : sums) CHECK(c == 0);

  auto sq = ez_product_cycle(circle_fundamental_cycle(3), circle_fundamental_cycle(3), 3);
  auto bd2 = chain_boundary(sq);
  std::map<Tuple, Integer> sums2;
  for (const auto& [t, c] : bd2.terms) sums2[t] += c;
  for (const auto& [t, c] : sums2) CHECK(c == 0);
}
