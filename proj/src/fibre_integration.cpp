#include "gerbes/fibre_integration.hpp"

#include <omp.h>

#include <algorithm>

namespace gerbes {

ProductFibrationCover make_product_fibration(const GoodCover& fibre_cover,
                                             const PartitionOfUnity& pou,
                                             const GoodCover& base_cover, size_t fibre_levels,
                                             size_t base_levels, size_t total_levels) {
  ProductFibrationCover pf{make_context(fibre_cover, fibre_levels),
                           make_context(base_cover, base_levels),
                           make_context(product_fibration_cover(fibre_cover, base_cover),
                                        total_levels),
                           pou};
  if (pou.phi.size() != fibre_cover.size())
    throw std::invalid_argument("partition of unity does not match the fibre cover");
  return pf;
}

std::vector<FibreCell> fibre_cells(const ProductFibrationCover& pf) {
  const size_t m = pf.m();
  const auto& xs = pf.fibre.space();
  // common refinement grid of all bumps
  std::vector<std::vector<Rational>> grid(m);
  for (const auto& f : pf.pou.phi)
    for (size_t c = 0; c < m; ++c)
      for (const auto& b : f.breaks[c]) grid[c].push_back(b);
  for (auto& g : grid) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }
  std::vector<Piecewise> phis;
  for (const auto& f : pf.pou.phi) phis.push_back(refined(f, grid));

  std::vector<FibreCell> cells;
  detail::for_each_cell(grid, [&](const std::vector<uint32_t>& idx) {
    FibreCell cell;
    cell.idx = idx;
    for (size_t c = 0; c < m; ++c) cell.box.push_back(phis[0].piece_interval(c, idx[c], xs));
    for (uint32_t j = 0; j < phis.size(); ++j) {
      auto it = phis[j].cells.find(idx);
      if (it != phis[j].cells.end() && !it->second.is_zero()) {
        cell.active.push_back(j);
        cell.phi.push_back(it->second);
      }
    }
    // cumulative sums; the last must be exactly 1 on the cell
    Poly run;
    for (const auto& f : cell.phi) {
      run += f;
      cell.S.push_back(run);
    }
    if (cell.S.empty() || !(cell.S.back() == Poly(Rational(1))))
      throw std::domain_error("active bumps do not sum to 1 on a fibre cell");
    cells.push_back(std::move(cell));
  });
  return cells;
}

namespace {

// W-space for the cech route: (T_0..T_{p-1}) x Y
CoordinateSpace t_workspace(const ProductFibrationCover& pf, size_t p) {
  std::vector<Coordinate> cs;
  for (size_t b = 0; b < p; ++b) cs.push_back(affine_coord("T" + std::to_string(b), 0, 1));
  CoordinateSpace w = make_space(std::move(cs));
  return product(w, pf.total.space());
}

// project a form that only involves the trailing base coordinates down to the
// base space (drops `lead` leading coordinates and the fibre block)
ExteriorForm project_to_base(const ProductFibrationCover& pf, const ExteriorForm& a,
                             size_t lead) {
  const size_t m = pf.m();
  const size_t drop = lead + m;
  const auto& bs = pf.base.space();
  ExteriorForm r(bs, a.degree);
  for (const auto& [mask, coeff] : a.terms) {
    if (mask & ((WedgeMask(1) << drop) - 1))
      throw std::domain_error("projection: leading differentials remain");
    Piecewise c;
    c.cont = coeff.cont;
    c.breaks.assign(bs.dim(), {});
    for (size_t k = 0; k < bs.dim(); ++k) c.breaks[k] = coeff.breaks.at(drop + k);
    for (const auto& [idx, poly] : coeff.cells) {
      for (size_t k = 0; k < drop; ++k)
        if (poly.depends_on(static_cast<uint32_t>(k)))
          throw std::domain_error("projection: leading dependence remains");
      std::vector<uint32_t> nidx(idx.begin() + drop, idx.end());
      Poly q = reindex_poly(poly, -static_cast<int>(drop));
      auto it = c.cells.find(nidx);
      if (it == c.cells.end())
        c.cells[nidx] = std::move(q);
      else
        it->second += q;
    }
    c.prune();
    r.add_term(mask >> drop, c);
  }
  return r;
}

// cumulative barycentric coordinates as polynomials in the free t-block
std::vector<Poly> cumulative_in_t(size_t p) {
  std::vector<Poly> T(p);
  for (size_t b = 0; b < p; ++b) {
    Poly e(Rational(1));
    for (size_t k = b + 1; k <= p; ++k) e -= Poly::coord(static_cast<uint32_t>(k - 1));
    T[b] = e;
  }
  return T;
}

struct ChainInfo {
  // for r = 0..n-1: either an anchor polynomial or a T-variable index
  std::vector<std::optional<uint32_t>> var;  // T index when variable
  std::vector<Poly> expr;                    // anchor poly when not variable
};

ChainInfo make_chain(const Shuffle& sh, const std::vector<Poly>& S_shifted,
                     const std::vector<Poly>& T_exprs, bool t_vars_are_coords) {
  const size_t n = sh.n();
  ChainInfo ch;
  ch.var.resize(n);
  ch.expr.resize(n);
  for (size_t r = 0; r + 1 <= n; ++r) {
    if (sh.nu_step(r + 1)) {
      ch.expr[r] = S_shifted.at(sh.nu[r]);
    } else if (t_vars_are_coords) {
      ch.var[r] = sh.mu[r];
    } else {
      ch.expr[r] = T_exprs.at(sh.mu[r]);
    }
  }
  return ch;
}

// iterated exact integration of the T-variables over the staircase chain
Piecewise chain_T_integrate(Piecewise F, const ChainInfo& ch) {
  const size_t n = ch.var.size();
  // nearest anchor above each position
  std::vector<Poly> above(n);
  Poly next(Rational(1));
  for (size_t r = n; r-- > 0;) {
    above[r] = next;
    if (!ch.var[r]) next = ch.expr[r];
  }
  for (size_t r = n; r-- > 0;) {
    if (!ch.var[r]) continue;
    uint32_t tc = *ch.var[r];
    Poly lower = (r == 0) ? Poly(Rational(0))
                          : (ch.var[r - 1] ? Poly::coord(*ch.var[r - 1]) : ch.expr[r - 1]);
    Piecewise out;
    out.breaks = F.breaks;
    out.cont = F.cont;
    for (const auto& [idx, poly] : F.cells) {
      Poly A = antiderivative(poly, tc);
      Poly v = substitute(A, tc, above[r]) - substitute(A, tc, lower);
      if (!v.is_zero()) {
        auto it = out.cells.find(idx);
        if (it == out.cells.end())
          out.cells[idx] = std::move(v);
        else
          it->second += v;
      }
    }
    out.prune();
    F = std::move(out);
  }
  return F;
}

// the exact Cech-route value of one (level, tuple): a (degree-m-p)-form on Z
ExteriorForm cech_value(const ProductFibrationCover& pf, const SimplicialForm& omega,
                        const std::vector<FibreCell>& cells, size_t p, const Tuple& I) {
  const size_t m = pf.m();
  const int out_deg = omega.degree - static_cast<int>(m) - static_cast<int>(p);
  ExteriorForm out(pf.base.space(), out_deg);
  CoordinateSpace wspace = t_workspace(pf, p);
  const WedgeMask xmask = ((WedgeMask(1) << m) - 1) << p;
  const WedgeMask tmask = (p == 0) ? 0 : ((WedgeMask(1) << p) - 1);

  std::vector<Poly> Tvars(p);
  for (size_t b = 0; b < p; ++b) Tvars[b] = Poly::coord(static_cast<uint32_t>(b));

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    const FibreCell& cell = cells[ci];
    const uint32_t q = static_cast<uint32_t>(cell.active.size() - 1);
    const size_t n = p + q;
    if (n > omega.max_level)
      throw std::domain_error("input simplicial form does not carry enough levels");
    std::vector<Poly> S_shifted;
    for (const auto& s : cell.S) S_shifted.push_back(reindex_poly(s, static_cast<int>(p)));

    for (const auto& sh : enumerate_shuffles(q, static_cast<uint32_t>(p))) {
      Tuple v(n + 1);
      for (size_t r = 0; r <= n; ++r) v[r] = pf.pair_index(I[sh.mu[r]], cell.active[sh.nu[r]]);
      const ExteriorForm& w = omega.at(n, v);
      if (w.is_zero()) continue;

      // chart substitution sigma_r -> theta_r - theta_{r-1}
      Substitution sub = Substitution::identity_extend(level_space(pf.total, n), wspace);
      std::vector<Poly> sigma = chart_sigma(sh, S_shifted, Tvars);
      for (size_t r = 1; r <= n; ++r) sub.set_poly(static_cast<uint32_t>(r - 1), sigma[r]);
      ExteriorForm pulled = pullback(sub, w);

      ChainInfo chain = make_chain(sh, S_shifted, Tvars, /*t_vars_are_coords=*/true);
      for (const auto& [mask, coeff] : pulled.terms) {
        if ((mask & xmask) != xmask || (mask & tmask) != tmask) continue;
        int sign = front_extraction_sign(mask, xmask) *
                   front_extraction_sign(mask & ~xmask, tmask);
        if (p % 2 == 1) sign = -sign;  // orientation of cumulative coordinates
        Piecewise val = chain_T_integrate(coeff, chain);
        for (size_t c = 0; c < m; ++c)
          val = integrate_coord(val, wspace, static_cast<uint32_t>(p + c), cell.box[c].lo,
                                cell.box[c].hi);
        if (val.is_zero()) continue;
        ExteriorForm shifted(wspace, out_deg);
        shifted.add_term(mask & ~(xmask | tmask), sign < 0 ? -val : val);
        out = out + project_to_base(pf, shifted, p);
      }
    }
  }
  return out;
}

std::vector<CechCochain> assemble_components(const ProductFibrationCover& pf,
                                             const SimplicialForm& omega, size_t out_levels,
                                             bool parallel) {
  const int m = static_cast<int>(pf.m());
  std::vector<FibreCell> cells = fibre_cells(pf);
  std::vector<CechCochain> comps;
  struct Job {
    size_t p;
    size_t tuple_idx;
  };
  std::vector<Job> jobs;
  for (size_t p = 0; p <= out_levels; ++p) {
    if (omega.degree - m - static_cast<int>(p) < 0) break;
    comps.push_back(CechCochain{static_cast<int>(p), omega.degree - m - static_cast<int>(p), {}});
    for (size_t k = 0; k < pf.base.nerve.level(p).size(); ++k) jobs.push_back({p, k});
  }
  std::vector<ExteriorForm> results(jobs.size());
  std::exception_ptr failure;
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long idx = 0; idx < static_cast<long>(jobs.size()); ++idx) {
      try {
        const auto& j = jobs[idx];
        results[idx] =
            cech_value(pf, omega, cells, j.p, pf.base.nerve.level(j.p)[j.tuple_idx]);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  } else {
    for (size_t idx = 0; idx < jobs.size(); ++idx) {
      const auto& j = jobs[idx];
      results[idx] =
          cech_value(pf, omega, cells, j.p, pf.base.nerve.level(j.p)[j.tuple_idx]);
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (size_t idx = 0; idx < jobs.size(); ++idx) {
    const auto& j = jobs[idx];
    comps[j.p].values.emplace(pf.base.nerve.level(j.p)[j.tuple_idx], std::move(results[idx]));
  }
  return comps;
}

}  // namespace

std::vector<CechCochain> fibre_integrate_cech(const ProductFibrationCover& pf,
                                              const SimplicialForm& omega, size_t out_levels,
                                              const FibreOptions& opts) {
  if (!omega.normal_hint)
    throw std::domain_error("fibre integration is defined for normal simplicial forms");
  return assemble_components(pf, omega, out_levels, opts.parallel);
}

std::vector<CechCochain> fibre_integrate_cech_serial(const ProductFibrationCover& pf,
                                                     const SimplicialForm& omega,
                                                     size_t out_levels) {
  if (!omega.normal_hint)
    throw std::domain_error("fibre integration is defined for normal simplicial forms");
  return assemble_components(pf, omega, out_levels, false);
}

// ---------------------------------------------------------------------------
// form-level route

namespace {

// integrate the staircase window coordinate: S0(x) between lo and hi polys
Piecewise window_integrate(const Piecewise& F, const CoordinateSpace& sp, uint32_t xc,
                           const Poly& S0, const Interval& cellbox, const Poly& lo,
                           const Poly& hi) {
  // S0 = a + b x on the cell, with full range {0,1} at the endpoints
  Poly bpoly = derivative(S0, xc);
  if (!bpoly.is_constant())
    throw std::domain_error(
        "form-level fibre integral needs a piecewise-affine partition of unity");
  Rational b = bpoly.constant_value();
  Poly apoly = S0 - Poly::coord(xc) * b;
  if (!apoly.is_constant()) throw std::domain_error("transition is not affine in one coordinate");
  Rational a = apoly.constant_value();
  Rational at_lo = a + b * cellbox.lo, at_hi = a + b * cellbox.hi;
  if (!((at_lo == 0 && at_hi == 1) || (at_lo == 1 && at_hi == 0)))
    throw std::domain_error("transition does not span the full bump range on the cell");
  // x(u) = (u - a)/b; integrate from x(lo) to x(hi) with orientation by sign b
  Poly xlo = (lo - Poly(a)) * (Rational(1) / b);
  Poly xhi = (hi - Poly(a)) * (Rational(1) / b);
  if (b < 0) std::swap(xlo, xhi);

  Piecewise out;
  out.breaks = F.breaks;
  out.breaks[xc].clear();
  out.cont = F.cont;
  // require a single piece across the window coordinate within the cell
  for (const auto& br : F.breaks[xc])
    if (cellbox.lo < br && br < cellbox.hi)
      throw std::domain_error("window coordinate is subdivided inside a fibre cell");
  uint32_t pick = 0;
  {
    // piece containing the cell midpoint
    Rational mid = (cellbox.lo + cellbox.hi) / 2;
    uint32_t i = 0;
    while (i < F.breaks[xc].size() && !(mid < F.breaks[xc][i])) ++i;
    pick = i;
  }
  for (const auto& [idx, poly] : F.cells) {
    if (idx[xc] != pick) continue;
    Poly A = antiderivative(poly, xc);
    Poly val = substitute(A, xc, xhi) - substitute(A, xc, xlo);
    if (val.is_zero()) continue;
    std::vector<uint32_t> nidx = idx;
    nidx[xc] = 0;
    auto it = out.cells.find(nidx);
    if (it == out.cells.end())
      out.cells[nidx] = std::move(val);
    else
      it->second += val;
  }
  out.prune();
  return out;
}

ExteriorForm form_value(const ProductFibrationCover& pf, const SimplicialForm& omega,
                        const std::vector<FibreCell>& cells, size_t p, const Tuple& I) {
  const size_t m = pf.m();
  const int out_deg = omega.degree - static_cast<int>(m);
  CoordinateSpace wspace = level_space(pf.total, p);  // (t1..tp) x X x Z
  ExteriorForm acc(wspace, out_deg);
  const WedgeMask xmask = ((WedgeMask(1) << m) - 1) << p;
  std::vector<Poly> Tcum = cumulative_in_t(p);

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    const FibreCell& cell = cells[ci];
    const uint32_t q = static_cast<uint32_t>(cell.active.size() - 1);
    if (q >= 2 && p >= 1)
      throw std::domain_error(
          "form-level fibre integral supports at most two active bumps per cell");
    const size_t n = p + q;
    if (n > omega.max_level)
      throw std::domain_error("input simplicial form does not carry enough levels");
    std::vector<Poly> S_shifted;
    for (const auto& s : cell.S) S_shifted.push_back(reindex_poly(s, static_cast<int>(p)));

    for (const auto& sh : enumerate_shuffles(q, static_cast<uint32_t>(p))) {
      Tuple v(n + 1);
      for (size_t r = 0; r <= n; ++r) v[r] = pf.pair_index(I[sh.mu[r]], cell.active[sh.nu[r]]);
      const ExteriorForm& w = omega.at(n, v);
      if (w.is_zero()) continue;

      Substitution sub = Substitution::identity_extend(level_space(pf.total, n), wspace);
      std::vector<Poly> sigma = chart_sigma(sh, S_shifted, Tcum);
      for (size_t r = 1; r <= n; ++r) sub.set_poly(static_cast<uint32_t>(r - 1), sigma[r]);
      ExteriorForm pulled = pullback(sub, w);

      // window bounds for the single transition (q = 1, p >= 1)
      std::optional<std::pair<Poly, Poly>> window;
      uint32_t window_coord = 0;
      if (q == 1 && p >= 1) {
        // position r* with theta_{r*} = S_0: the step r*+1 is the nu-step
        size_t rstar = 0;
        for (size_t r = 1; r <= n; ++r)
          if (sh.nu_step(r)) rstar = r - 1;
        Poly lo = (rstar == 0) ? Poly(Rational(0))
                               : (sh.nu_step(rstar) ? S_shifted[sh.nu[rstar - 1]]
                                                    : Tcum[sh.mu[rstar - 1]]);
        Poly hi = (rstar + 1 == n)
                      ? Poly(Rational(1))
                      : (sh.nu_step(rstar + 2) ? S_shifted[sh.nu[rstar + 1]]
                                               : Tcum[sh.mu[rstar + 1]]);
        window = std::make_pair(lo, hi);
        // transition coordinate: the one S_0 actually varies in
        bool found = false;
        for (size_t c = 0; c < m; ++c)
          if (S_shifted[0].depends_on(static_cast<uint32_t>(p + c))) {
            window_coord = static_cast<uint32_t>(p + c);
            found = true;
          }
        if (!found) throw std::domain_error("degenerate transition cell");
      }

      for (const auto& [mask, coeff] : pulled.terms) {
        if ((mask & xmask) != xmask) continue;
        int sign = front_extraction_sign(mask, xmask);
        Piecewise val = coeff;
        for (size_t c = 0; c < m; ++c) {
          uint32_t xc = static_cast<uint32_t>(p + c);
          if (window && xc == window_coord) continue;
          val = integrate_coord(val, wspace, xc, cell.box[c].lo, cell.box[c].hi);
        }
        if (window)
          val = window_integrate(val, wspace, window_coord, S_shifted[0],
                                 cell.box[window_coord - p], window->first, window->second);
        if (val.is_zero()) continue;
        if (sign < 0) val = -val;
        acc.add_term(mask & ~xmask, val);
      }
    }
  }
  return acc;
}

// drop the fibre block from a level-p form on (t, X, Z)
ExteriorForm strip_fibre(const ProductFibrationCover& pf, const ExteriorForm& a, size_t p) {
  const size_t m = pf.m();
  CoordinateSpace target = product(simplex_space(p), pf.base.space());
  ExteriorForm r(target, a.degree);
  const WedgeMask tmask = (p == 0) ? 0 : ((WedgeMask(1) << p) - 1);
  for (const auto& [mask, coeff] : a.terms) {
    if (mask & (((WedgeMask(1) << m) - 1) << p))
      throw std::domain_error("strip_fibre: fibre differentials remain");
    Piecewise c;
    c.cont = coeff.cont;
    c.breaks.resize(target.dim());
    for (size_t k = 0; k < p; ++k) c.breaks[k] = coeff.breaks.at(k);
    for (size_t k = 0; k < pf.base.space().dim(); ++k)
      c.breaks[p + k] = coeff.breaks.at(p + m + k);
    for (const auto& [idx, poly] : coeff.cells) {
      for (size_t k = 0; k < m; ++k)
        if (poly.depends_on(static_cast<uint32_t>(p + k)))
          throw std::domain_error("strip_fibre: fibre dependence remains");
      std::vector<uint32_t> nidx(idx.begin(), idx.begin() + p);
      nidx.insert(nidx.end(), idx.begin() + p + m, idx.end());
      Poly q;
      for (const auto& [mono, cv] : poly.terms) {
        Monomial nm = mono;
        for (auto& f : nm.factors)
          if (f.coord >= p + m) f.coord -= static_cast<uint32_t>(m);
        q.add_term(nm, cv);
      }
      auto it = c.cells.find(nidx);
      if (it == c.cells.end())
        c.cells[nidx] = std::move(q);
      else
        it->second += q;
    }
    c.prune();
    WedgeMask nmask = (mask & tmask) | ((mask >> m) & ~tmask);
    r.add_term(nmask, c);
  }
  return r;
}

}  // namespace

std::vector<PullbackPiece> phi_tilde_pullback(const ProductFibrationCover& pf,
                                              const SimplicialForm& omega, size_t p,
                                              const Tuple& base_tuple) {
  if (!omega.normal_hint)
    throw std::domain_error("the staircase pullback is defined for normal simplicial forms");
  std::vector<PullbackPiece> pieces;
  std::vector<FibreCell> cells = fibre_cells(pf);
  CoordinateSpace wspace = level_space(pf.total, p);
  std::vector<Poly> Tcum = cumulative_in_t(p);
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    const FibreCell& cell = cells[ci];
    const uint32_t q = static_cast<uint32_t>(cell.active.size() - 1);
    const size_t n = p + q;
    if (n > omega.max_level)
      throw std::domain_error("input simplicial form does not carry enough levels");
    std::vector<Poly> S_shifted;
    for (const auto& s : cell.S) S_shifted.push_back(reindex_poly(s, static_cast<int>(p)));
    for (const auto& sh : enumerate_shuffles(q, static_cast<uint32_t>(p))) {
      Tuple v(n + 1);
      for (size_t r = 0; r <= n; ++r)
        v[r] = pf.pair_index(base_tuple[sh.mu[r]], cell.active[sh.nu[r]]);
      Substitution sub = Substitution::identity_extend(level_space(pf.total, n), wspace);
      std::vector<Poly> sigma = chart_sigma(sh, S_shifted, Tcum);
      for (size_t r = 1; r <= n; ++r) sub.set_poly(static_cast<uint32_t>(r - 1), sigma[r]);
      pieces.push_back({ci, sh, pullback(sub, omega.at(n, v))});
    }
  }
  return pieces;
}

SimplicialForm fibre_integrate(const ProductFibrationCover& pf, const SimplicialForm& omega,
                               size_t out_levels, const FibreOptions& opts) {
  if (!omega.normal_hint)
    throw std::domain_error("fibre integration is defined for normal simplicial forms");
  const int m = static_cast<int>(pf.m());
  SimplicialForm out = zero_simplicial(pf.base, omega.degree - m, out_levels);
  out.normal_hint = false;  // the output need not be normal
  std::vector<FibreCell> cells = fibre_cells(pf);
  struct Job {
    size_t p;
    size_t tuple_idx;
  };
  std::vector<Job> jobs;
  for (size_t p = 0; p <= out_levels; ++p)
    for (size_t k = 0; k < pf.base.nerve.level(p).size(); ++k) jobs.push_back({p, k});
  std::vector<ExteriorForm> results(jobs.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (long idx = 0; idx < static_cast<long>(jobs.size()); ++idx) {
    try {
      const auto& j = jobs[idx];
      const Tuple& I = pf.base.nerve.level(j.p)[j.tuple_idx];
      results[idx] = strip_fibre(pf, form_value(pf, omega, cells, j.p, I), j.p);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (size_t idx = 0; idx < jobs.size(); ++idx) {
    const auto& j = jobs[idx];
    out.values[j.p][pf.base.nerve.level(j.p)[j.tuple_idx]] = std::move(results[idx]);
  }
  return out;
}

ExteriorForm classical_fibre_integral(const ProductFibrationCover& pf, const ExteriorForm& a) {
  std::vector<uint32_t> fibre_coords;
  for (size_t c = 0; c < pf.m(); ++c) fibre_coords.push_back(static_cast<uint32_t>(c));
  ExteriorForm integrated = integrate_coords_full(a, fibre_coords);
  return project_to_base(pf, integrated, 0);
}

// ---------------------------------------------------------------------------
// numeric backend

namespace {

// split a polynomial into (base-monomial -> head polynomial in T and x)
std::map<Monomial, Poly> split_base_monomials(const Poly& p, uint32_t first_base) {
  std::map<Monomial, Poly> out;
  for (const auto& [m, c] : p.terms) {
    Monomial head, tail;
    for (const auto& f : m.factors)
      (f.coord >= first_base ? tail : head).factors.push_back(f);
    out[tail].add_term(head, c);
  }
  return out;
}

Monomial reindex_monomial(const Monomial& m, int offset) {
  Monomial r = m;
  for (auto& f : r.factors) f.coord = static_cast<uint32_t>(static_cast<int>(f.coord) + offset);
  return r;
}

struct NumericKernel {
  const ProductFibrationCover& pf;
  const SimplicialForm& omega;
  const std::vector<FibreCell>& cells;
  QuadRule rule;

  // recursive chain quadrature over the T-variables at a fixed fibre point
  double chain_quad(const ChainInfo& ch, const std::vector<double>& anchors_above,
                    const std::vector<double>& lowers_fixed, size_t pos, double lower,
                    std::vector<double>& tvals,
                    const std::function<double(const std::vector<double>&)>& f) const {
    // advance to the next variable position
    size_t r = pos;
    while (r < ch.var.size() && !ch.var[r]) ++r;
    if (r == ch.var.size()) return f(tvals);
    double lo = (r == 0) ? 0.0 : (ch.var[r - 1] ? lower : lowers_fixed[r]);
    double hi = anchors_above[r];
    if (hi <= lo) return 0.0;
    Compensated acc;
    for (size_t k = 0; k < rule.points.size(); ++k) {
      double tv = lo + (hi - lo) * rule.points[k];
      tvals[*ch.var[r]] = tv;
      acc.add(rule.weights[k] * (hi - lo) *
              chain_quad(ch, anchors_above, lowers_fixed, r + 1, tv, tvals, f));
    }
    return acc.sum;
  }

  NumericValue value(size_t p, const Tuple& I) const {
    const size_t m = pf.m();
    NumericValue nv;
    CoordinateSpace wspace = t_workspace(pf, p);
    const WedgeMask xmask = ((WedgeMask(1) << m) - 1) << p;
    const WedgeMask tmask = (p == 0) ? 0 : ((WedgeMask(1) << p) - 1);
    std::vector<Poly> Tvars(p);
    for (size_t b = 0; b < p; ++b) Tvars[b] = Poly::coord(static_cast<uint32_t>(b));

    std::map<std::pair<WedgeMask, Monomial>, Compensated> acc;

    for (size_t ci = 0; ci < cells.size(); ++ci) {
      const FibreCell& cell = cells[ci];
      const uint32_t q = static_cast<uint32_t>(cell.active.size() - 1);
      const size_t n = p + q;
      if (n > omega.max_level)
        throw std::domain_error("input simplicial form does not carry enough levels");
      std::vector<Poly> S_shifted;
      for (const auto& s : cell.S) S_shifted.push_back(reindex_poly(s, static_cast<int>(p)));

      for (const auto& sh : enumerate_shuffles(q, static_cast<uint32_t>(p))) {
        Tuple v(n + 1);
        for (size_t r = 0; r <= n; ++r) v[r] = pf.pair_index(I[sh.mu[r]], cell.active[sh.nu[r]]);
        const ExteriorForm& w = omega.at(n, v);
        if (w.is_zero()) continue;
        Substitution sub = Substitution::identity_extend(level_space(pf.total, n), wspace);
        std::vector<Poly> sigma = chart_sigma(sh, S_shifted, Tvars);
        for (size_t r = 1; r <= n; ++r) sub.set_poly(static_cast<uint32_t>(r - 1), sigma[r]);
        ExteriorForm pulled = pullback(sub, w);
        ChainInfo chain = make_chain(sh, S_shifted, Tvars, true);

        for (const auto& [mask, coeff] : pulled.terms) {
          if ((mask & xmask) != xmask || (mask & tmask) != tmask) continue;
          int sign = front_extraction_sign(mask, xmask) *
                     front_extraction_sign(mask & ~xmask, tmask);
          if (p % 2 == 1) sign = -sign;
          WedgeMask zmask = (mask & ~(xmask | tmask)) >> (p + m);

          // quadrature over the fibre cell crossed with the chain region
          std::vector<int> xi(m, 0);
          std::vector<double> point(wspace.dim(), 0.0);
          const uint32_t first_base = static_cast<uint32_t>(p + m);
          while (true) {
            double wx = 1.0;
            for (size_t c = 0; c < m; ++c) {
              double lo = to_double(cell.box[c].lo), hi = to_double(cell.box[c].hi);
              point[p + c] = lo + (hi - lo) * rule.points[xi[c]];
              wx *= rule.weights[xi[c]] * (hi - lo);
            }
            // anchors evaluated at this fibre point
            std::vector<double> anchors_above(chain.var.size(), 1.0);
            std::vector<double> lowers_fixed(chain.var.size(), 0.0);
            {
              double next = 1.0;
              for (size_t r = chain.var.size(); r-- > 0;) {
                anchors_above[r] = next;
                if (!chain.var[r]) next = eval_double(chain.expr[r], point);
              }
              for (size_t r = 0; r < chain.var.size(); ++r)
                lowers_fixed[r] =
                    (r == 0) ? 0.0
                             : (chain.var[r - 1] ? 0.0 : eval_double(chain.expr[r - 1], point));
            }
            // per base-monomial quadrature of the head factor
            for (const auto& [idx, poly] : coeff.cells) {
              // skip cells that do not contain the current fibre point
              bool inside = true;
              for (size_t c = 0; c < m && inside; ++c) {
                Interval piece = coeff.piece_interval(static_cast<uint32_t>(p + c),
                                                      idx[p + c], wspace);
                double x = point[p + c];
                if (!(to_double(piece.lo) <= x && x <= to_double(piece.hi))) inside = false;
              }
              if (!inside) continue;
              for (auto& [zmono, head] : split_base_monomials(poly, first_base)) {
                auto f = [&](const std::vector<double>& tv) {
                  std::vector<double> pt = point;
                  for (size_t b = 0; b < p; ++b) pt[b] = tv[b];
                  return eval_double(head, pt);
                };
                std::vector<double> tvals(p, 0.0);
                double tint = chain_quad(chain, anchors_above, lowers_fixed, 0, 0.0, tvals, f);
                acc[{zmask, reindex_monomial(zmono, -static_cast<int>(p + m))}].add(
                    sign * wx * tint);
              }
            }
            size_t c = 0;
            for (; c < m; ++c) {
              if (++xi[c] < static_cast<int>(rule.points.size())) break;
              xi[c] = 0;
            }
            if (c == m) break;
          }
        }
      }
    }
    for (auto& [key, comp] : acc) nv.coeff[key.first][key.second] += comp.sum;
    return nv;
  }
};

}  // namespace

std::vector<NumericCochain> fibre_integrate_cech_numeric(const ProductFibrationCover& pf,
                                                         const SimplicialForm& omega,
                                                         size_t out_levels, int quad_order,
                                                         const FibreOptions& opts) {
  if (!omega.normal_hint)
    throw std::domain_error("fibre integration is defined for normal simplicial forms");
  const int m = static_cast<int>(pf.m());
  std::vector<FibreCell> cells = fibre_cells(pf);
  NumericKernel kernel{pf, omega, cells, gauss_legendre(quad_order)};
  std::vector<NumericCochain> comps;
  struct Job {
    size_t p;
    size_t tuple_idx;
  };
  std::vector<Job> jobs;
  for (size_t p = 0; p <= out_levels; ++p) {
    if (omega.degree - m - static_cast<int>(p) < 0) break;
    comps.push_back(NumericCochain{static_cast<int>(p), omega.degree - m - static_cast<int>(p), {}});
    for (size_t k = 0; k < pf.base.nerve.level(p).size(); ++k) jobs.push_back({p, k});
  }
  std::vector<NumericValue> results(jobs.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (long idx = 0; idx < static_cast<long>(jobs.size()); ++idx) {
    try {
      const auto& j = jobs[idx];
      results[idx] = kernel.value(j.p, pf.base.nerve.level(j.p)[j.tuple_idx]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (size_t idx = 0; idx < jobs.size(); ++idx) {
    const auto& j = jobs[idx];
    comps[j.p].values.emplace(pf.base.nerve.level(j.p)[j.tuple_idx], std::move(results[idx]));
  }
  return comps;
}

double numeric_vs_exact(const std::vector<CechCochain>& exact,
                        const std::vector<NumericCochain>& numeric) {
  double worst = 0.0;
  for (size_t k = 0; k < std::min(exact.size(), numeric.size()); ++k) {
    for (const auto& [t, v] : exact[k].values) {
      auto nit = numeric[k].values.find(t);
      if (nit == numeric[k].values.end()) continue;
      // flatten exact values into (mask, monomial) -> coefficient
      std::map<std::pair<WedgeMask, Monomial>, double> flat;
      for (const auto& [mask, coeff] : v.terms) {
        if (!coeff.single_cell())
          throw std::domain_error("numeric comparison requires unbroken base coefficients");
        for (const auto& [mono, c] : coeff.only_poly().terms)
          flat[{mask, mono}] = to_double(c);
      }
      for (const auto& [mask, monos] : nit->second.coeff)
        for (const auto& [mono, c] : monos) {
          double e = 0.0;
          auto fit = flat.find({mask, mono});
          if (fit != flat.end()) {
            e = fit->second;
            flat.erase(fit);
          }
          worst = std::max(worst, std::fabs(c - e));
        }
      for (const auto& [key, c] : flat) worst = std::max(worst, std::fabs(c));
    }
  }
  return worst;
}

namespace {

// numeric exterior derivative of a z-monomial dictionary
NumericValue numeric_d(const NumericValue& v, size_t zdim) {
  NumericValue out;
  for (const auto& [mask, monos] : v.coeff)
    for (const auto& [mono, c] : monos) {
      for (uint32_t zc = 0; zc < zdim; ++zc) {
        if (mask_has(mask, zc)) continue;
        Poly single;
        single.add_term(mono, Rational(1));
        Poly der = derivative(single, zc);
        if (der.is_zero()) continue;
        WedgeMask lower = (zc == 0) ? 0 : (mask & ((WedgeMask(1) << zc) - 1));
        double sgn = (popcount(lower) % 2 == 0) ? 1.0 : -1.0;
        for (const auto& [dm, dc] : der.terms)
          out.coeff[mask | (WedgeMask(1) << zc)][dm] += sgn * c * to_double(dc);
      }
    }
  return out;
}

double numeric_max(const NumericValue& v) {
  double r = 0;
  for (const auto& [mask, monos] : v.coeff)
    for (const auto& [mono, c] : monos) r = std::max(r, std::fabs(c));
  return r;
}

NumericValue numeric_sub(const NumericValue& a, const NumericValue& b, double bscale) {
  NumericValue out = a;
  for (const auto& [mask, monos] : b.coeff)
    for (const auto& [mono, c] : monos) out.coeff[mask][mono] -= bscale * c;
  return out;
}

}  // namespace

double stokes_residual_numeric(const ProductFibrationCover& pf, const SimplicialForm& omega,
                               size_t out_levels, int quad_order) {
  const int m = static_cast<int>(pf.m());
  auto lhs = fibre_integrate_cech_numeric(pf, simplicial_d(omega), out_levels, quad_order);
  auto rhs = fibre_integrate_cech_numeric(pf, omega, out_levels, quad_order);
  const double msign = (m % 2 == 0) ? 1.0 : -1.0;
  const size_t zdim = pf.base.space().dim();
  double worst = 0.0;
  // I(int d w)^{(p,q)} = (-1)^m [ delta c^{(p-1,q)} + (-1)^p d c^{(p,q-1)} ]
  for (size_t p = 0; p < lhs.size(); ++p) {
    for (const auto& t : pf.base.nerve.level(p)) {
      if (is_degenerate(t)) continue;
      NumericValue expect;
      if (p >= 1 && p - 1 < rhs.size()) {
        for (size_t nu2 = 0; nu2 < t.size(); ++nu2) {
          auto fit = rhs[p - 1].values.find(face(t, nu2));
          if (fit == rhs[p - 1].values.end()) continue;
          double sgn = (nu2 % 2 == 0) ? 1.0 : -1.0;
          for (const auto& [mask, monos] : fit->second.coeff)
            for (const auto& [mono, c] : monos) expect.coeff[mask][mono] += sgn * c;
        }
      }
      if (p < rhs.size()) {
        auto rit = rhs[p].values.find(t);
        if (rit != rhs[p].values.end()) {
          NumericValue dv = numeric_d(rit->second, zdim);
          double sgn = (p % 2 == 0) ? 1.0 : -1.0;
          for (const auto& [mask, monos] : dv.coeff)
            for (const auto& [mono, c] : monos) expect.coeff[mask][mono] += sgn * c;
        }
      }
      auto lit = lhs[p].values.find(t);
      NumericValue got = (lit == lhs[p].values.end()) ? NumericValue{} : lit->second;
      worst = std::max(worst, numeric_max(numeric_sub(got, expect, msign)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

StokesReport stokes_residual(const ProductFibrationCover& pf, const SimplicialForm& omega,
                             size_t out_levels, int sign_override) {
  const int m = static_cast<int>(pf.m());
  SimplicialForm lhs = fibre_integrate(pf, simplicial_d(omega), out_levels);
  SimplicialForm rhs = simplicial_d(fibre_integrate(pf, omega, out_levels));
  int sgn = sign_override ? sign_override : ((m % 2 == 0) ? 1 : -1);
  StokesReport rep;
  rep.exact_ok = true;
  for (size_t p = 0; p <= out_levels; ++p) {
    for (const auto& t : pf.base.nerve.level(p)) {
      if (is_degenerate(t)) continue;
      ExteriorForm resid = lhs.at(p, t) - rhs.at(p, t) * Rational(sgn);
      Domain dom;
      dom.per_coord.assign(p + pf.base.space().dim(), {});
      Domain basedom = pf.base.domain(t);
      for (size_t c = 0; c < basedom.per_coord.size(); ++c)
        dom.per_coord[c + p] = basedom.per_coord[c];
      if (!zero_on(resid, dom)) rep.exact_ok = false;
    }
  }
  return rep;
}

IntegralityReport check_integral_preserved(const ProductFibrationCover& pf,
                                           const SimplicialForm& omega, size_t out_levels) {
  IntegralityReport rep;
  auto comps = fibre_integrate_cech(pf, omega, out_levels);
  for (const auto& comp : comps) {
    if (comp.q > 0) {
      bool ok = true;
      for (const auto& [t, v] : comp.values)
        if (!is_degenerate(t) && !zero_on(v, Domain::whole(pf.base.space()))) ok = false;
      rep.lines.push_back({"component (" + std::to_string(comp.p) + "," +
                               std::to_string(comp.q) + ") vanishes",
                           ok, ok ? 0.0 : 1.0, ""});
      rep.ok = rep.ok && ok;
    } else {
      bool ok = true;
      for (const auto& [t, v] : comp.values) {
        if (is_degenerate(t)) continue;
        if (v.is_zero()) continue;
        auto it = v.terms.find(0);
        if (it == v.terms.end() || v.terms.size() != 1) {
          ok = false;
          continue;
        }
        Rational c = eval_exact(it->second, std::vector<Rational>(pf.base.space().dim(), 0));
        if (!is_integer(c)) ok = false;
      }
      rep.lines.push_back({"component (" + std::to_string(comp.p) + ",0) integral", ok,
                           ok ? 0.0 : 1.0, ""});
      rep.ok = rep.ok && ok;
    }
  }
  return rep;
}

DeligneCocycle deligne_pushforward(const ProductFibrationCover& pf, const DeligneCocycle& dc,
                                   size_t out_levels, const FibreOptions& opts) {
  const int m = static_cast<int>(pf.m());
  if (dc.level < m) throw std::invalid_argument("pushforward needs level >= fibre dimension");
  // maximal shuffle level needed by the staircase sum
  size_t qmax = 0;
  for (const auto& cell : fibre_cells(pf)) qmax = std::max(qmax, cell.active.size() - 1);
  size_t lift_levels = out_levels + qmax;
  SimplicialForm lifted = whitney_lift(pf.total, dc.omega, lift_levels);
  auto comps = fibre_integrate_cech(pf, lifted, out_levels, opts);

  DeligneCocycle out;
  out.level = dc.level - m;
  for (int nu = 0; nu <= out.level; ++nu) out.omega.push_back(comps.at(nu));
  out.theta = comps.at(out.level);
  for (auto& [t, v] : out.theta.values) v = v * Rational(-1);
  return out;
}

}  // namespace gerbes
