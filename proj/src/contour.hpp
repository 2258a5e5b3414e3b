#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace asep {

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

/// Equally spaced nodes on a counterclockwise circle. Weights carry the
/// 1/(2 pi i) factor: sum_j weights[j] f(nodes[j]) ~ (1/2 pi i) \oint f.
struct ContourGrid {
  cplx center;
  double radius = 0.0;
  std::vector<cplx> nodes;
  std::vector<cplx> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Requires radius > 0 and n >= 8.
ContourGrid make_circle(cplx center, double radius, int n);

/// Every other node of an even-sized grid, weights doubled. Used for the
/// half-resolution error estimate; may go below the n >= 8 floor.
ContourGrid half_grid(const ContourGrid& grid);

template <class F>
cplx integrate(const ContourGrid& grid, F&& f) {
  cplx sum{0.0, 0.0};
  for (int j = 0; j < grid.size(); ++j) sum += grid.weights[j] * f(grid.nodes[j]);
  return sum;
}

struct FredholmEvaluation {
  cplx value;
  int n_used = 0;
  double error_estimate = 0.0;
};

using Kernel = std::function<cplx(cplx, cplx)>;

/// M[j,k] = kernel(node_j, node_k) * weight_k.
CMatrix nystrom_matrix(const Kernel& kernel, const ContourGrid& grid);

/// det(I - lambda M) by LU with partial pivoting. Throws Error(Singular) if a
/// pivot falls below pivot_floor times the largest row norm.
cplx det_identity_minus(const CMatrix& M, cplx lambda, double pivot_floor = 1e-300);

/// det(I - lambda M) for many lambda: M is reduced once to upper Hessenberg
/// form by a unitary similarity, after which each determinant is an O(n^2)
/// LU with partial pivoting.
class FredholmPencil {
 public:
  explicit FredholmPencil(const CMatrix& M);

  cplx det_identity_minus(cplx lambda) const;
  Eigen::Index size() const { return hessenberg_.rows(); }

 private:
  CMatrix hessenberg_;
};

/// Nystrom value of det(I - lambda K) on the grid; the error estimate is the
/// difference to the half-resolution grid.
FredholmEvaluation nystrom_fredholm_det(const Kernel& kernel, const ContourGrid& grid,
                                        cplx lambda);

/// Doubles the node count from n_start until the error estimate drops below
/// tol or n_cap is reached (Error(Convergence) in that case).
FredholmEvaluation fredholm_det_converged(const Kernel& kernel, cplx center, double radius,
                                          cplx lambda, int n_start = 64, double tol = 1e-9,
                                          int n_cap = 1024);

using MultiIntegrand = std::function<cplx(std::span<const cplx>)>;

/// Tensor-product trapezoidal rule over k copies of the grid (k <= 3).
cplx contour_integral_multi(const MultiIntegrand& f, const ContourGrid& grid, int k);

}  // namespace asep
