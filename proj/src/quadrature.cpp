#include "gerbes/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace gerbes {

QuadRule gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be positive");
  const int n = order;
  QuadRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // initial guess (Chebyshev) on [-1,1], refined by Newton
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      double dp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int k = 0; k < n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
    }
    double dp = n * (x * p0 - p1) / (x * x - 1.0);
    r.points[i] = 0.5 * (1.0 - x);  // map to [0,1], ascending
    r.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

SimplexRule ordered_simplex_rule(int dim, int order) {
  SimplexRule out;
  if (dim == 0) {
    out.points.push_back({});
    out.weights.push_back(1.0);
    return out;
  }
  QuadRule g = gauss_legendre(order);
  std::vector<int> idx(dim, 0);
  while (true) {
    // map cube point u to ordered cumulative coordinates: T_{d-1} = u_{d-1},
    // T_{d-2} = T_{d-1} * u_{d-2}, ...; Jacobian = prod T_{k}^{k} terms
    std::vector<double> T(dim);
    double w = 1.0;
    double upper = 1.0;
    for (int k = dim - 1; k >= 0; --k) {
      double u = g.points[idx[k]];
      T[k] = upper * u;
      w *= g.weights[idx[k]] * upper;
      upper = T[k];
    }
    out.points.push_back(T);
    out.weights.push_back(w);
    int c = 0;
    for (; c < dim; ++c) {
      if (++idx[c] < order) break;
      idx[c] = 0;
    }
    if (c == dim) break;
  }
  return out;
}

}  // namespace gerbes
