#include "gerbes/shuffle.hpp"

#include <functional>

namespace gerbes {

std::vector<Shuffle> enumerate_shuffles(uint32_t q, uint32_t p) {
  std::vector<Shuffle> out;
  Shuffle cur;
  cur.nu = {0};
  cur.mu = {0};
  std::function<void()> rec = [&]() {
    uint32_t a = cur.nu.back(), b = cur.mu.back();
    if (a == q && b == p) {
      out.push_back(cur);
      return;
    }
    if (a < q) {
      cur.nu.push_back(a + 1);
      cur.mu.push_back(b);
      rec();
      cur.nu.pop_back();
      cur.mu.pop_back();
    }
    if (b < p) {
      cur.nu.push_back(a);
      cur.mu.push_back(b + 1);
      rec();
      cur.nu.pop_back();
      cur.mu.pop_back();
    }
  };
  rec();
  return out;
}

std::vector<Poly> sigma_coords(const Shuffle& sh, const std::vector<Poly>& t,
                               const std::vector<Poly>& phi) {
  const size_t n = sh.n();
  if (t.size() != sh.p() + 1 || phi.size() != sh.q() + 1)
    throw std::invalid_argument("sigma_coords: wrong t or phi arity");
  std::vector<Poly> sigma(n + 1);
  sigma[0] = t[0] * phi[0];
  for (size_t r = 1; r <= n; ++r) {
    if (sh.nu_step(r)) {
      sigma[r] = t[sh.mu[r]] * phi[sh.nu[r]];
    } else {
      Poly hi, lo;
      for (size_t v = sh.nu[r] + 1; v < phi.size(); ++v) hi += phi[v];
      for (size_t v = 0; v <= sh.nu[r]; ++v) lo += phi[v];
      sigma[r] = t[sh.mu[r - 1]] * hi + t[sh.mu[r]] * lo;
    }
  }
  return sigma;
}

std::vector<Poly> shuffle_theta(const Shuffle& sh, const std::vector<Poly>& S,
                                const std::vector<Poly>& T) {
  const size_t n = sh.n();
  std::vector<Poly> theta(n);  // r = 0..n-1
  for (size_t r = 0; r + 1 <= n; ++r) {
    if (sh.nu_step(r + 1))
      theta[r] = S.at(sh.nu[r]);
    else
      theta[r] = T.at(sh.mu[r]);
  }
  return theta;
}

std::vector<Poly> chart_sigma(const Shuffle& sh, const std::vector<Poly>& S,
                              const std::vector<Poly>& T) {
  const size_t n = sh.n();
  std::vector<Poly> theta = shuffle_theta(sh, S, T);
  std::vector<Poly> sigma(n + 1);
  for (size_t r = 0; r <= n; ++r) {
    const Poly hi = (r == n) ? Poly(Rational(1)) : theta[r];
    if (r == 0)
      sigma[r] = hi;
    else
      sigma[r] = hi - theta[r - 1];
  }
  return sigma;
}

}  // namespace gerbes
