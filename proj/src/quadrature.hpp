#pragma once

#include <vector>

namespace asep {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], increasing
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n). Error(Domain) if n < 1.
GaussRule gauss_legendre(int n);

}  // namespace asep
