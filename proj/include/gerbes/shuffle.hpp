#pragma once

#include "gerbes/poly.hpp"

namespace gerbes {

// A (q,p)-shuffle: a pair of nondecreasing functions (nu, mu) on {0..n},
// n = p+q, with nu(0) = mu(0) = 0, nu(n) = q, mu(n) = p, stepping exactly one
// of the two by 1 at a time.  Shuffles index the simplices of the staircase
// triangulation of the prism Delta^q x Delta^p.
struct Shuffle {
  std::vector<uint32_t> nu, mu;  // length n+1

  size_t n() const { return nu.size() - 1; }
  uint32_t q() const { return nu.back(); }
  uint32_t p() const { return mu.back(); }
  // was step r (1-based) a nu-step?
  bool nu_step(size_t r) const { return nu[r] > nu[r - 1]; }
};

// All (q,p)-shuffles, in a deterministic order (nu-steps taken first).
std::vector<Shuffle> enumerate_shuffles(uint32_t q, uint32_t p);

// The coordinates (sigma_0..sigma_n) of the smooth prism map attached to a
// shuffle, with t the barycentric coordinates of Delta^p and phi the active
// bump values: sigma_r = t_{mu(r)} phi_{nu(r)} for a nu-step, and for a
// mu-step the two-block sum over the lexicographic interval.  Inputs are
// polynomials, so the map can be formed symbolically; sums to 1.
std::vector<Poly> sigma_coords(const Shuffle& sh, const std::vector<Poly>& t,
                               const std::vector<Poly>& phi);

// Chart description of the shuffle's staircase simplex in cumulative
// variables: theta_r is the cumulative sum sigma_0+..+sigma_r, equal to the
// running partial sum S_{nu(r)} of the bumps on a nu-step boundary and to the
// cumulative barycentric T_{mu(r)} on a mu-step boundary.  The simplex region
// is exactly { theta nondecreasing }, i.e. all sigma_r >= 0.
// theta expressions for r = 0..n-1 given S- and T-expressions:
std::vector<Poly> shuffle_theta(const Shuffle& sh, const std::vector<Poly>& S,
                                const std::vector<Poly>& T);

// sigma_r = theta_r - theta_{r-1} with theta_{-1} = 0, theta_n = 1.
std::vector<Poly> chart_sigma(const Shuffle& sh, const std::vector<Poly>& S,
                              const std::vector<Poly>& T);

}  // namespace gerbes
