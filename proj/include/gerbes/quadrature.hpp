#pragma once

#include <vector>

namespace gerbes {

struct QuadRule {
  std::vector<double> points;   // on [0,1]
  std::vector<double> weights;  // sum to 1
};

// Gauss-Legendre rule on [0,1] (nodes by Newton iteration on P_n).
QuadRule gauss_legendre(int order);

// Tensorized rule over the ordered simplex {0 <= T_0 <= ... <= T_{d-1} <= 1}
// via the Duffy-style map from the unit cube; weights include the Jacobian.
struct SimplexRule {
  std::vector<std::vector<double>> points;  // cumulative coordinates T
  std::vector<double> weights;
};
SimplexRule ordered_simplex_rule(int dim, int order);

// Kahan-compensated accumulation.
struct Compensated {
  double sum = 0, c = 0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace gerbes
