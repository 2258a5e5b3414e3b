#include "contour.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "error.hpp"

namespace asep {

ContourGrid make_circle(cplx center, double radius, int n) {
  require(radius > 0.0 && std::isfinite(radius), ErrorCode::Domain,
          "contour radius must be positive");
  require(n >= 8, ErrorCode::Domain, "contour needs at least 8 nodes");
  ContourGrid grid;
  grid.center = center;
  grid.radius = radius;
  grid.nodes.resize(n);
  grid.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    const double angle = 2.0 * std::numbers::pi * j / n;
    const cplx offset = std::polar(radius, angle);
    grid.nodes[j] = center + offset;
    grid.weights[j] = offset / static_cast<double>(n);
  }
  return grid;
}

ContourGrid half_grid(const ContourGrid& grid) {
  require(grid.size() % 2 == 0 && grid.size() >= 4, ErrorCode::Domain,
          "half grid needs an even node count");
  ContourGrid half;
  half.center = grid.center;
  half.radius = grid.radius;
  for (int j = 0; j < grid.size(); j += 2) {
    half.nodes.push_back(grid.nodes[j]);
    half.weights.push_back(2.0 * grid.weights[j]);
  }
  return half;
}

CMatrix nystrom_matrix(const Kernel& kernel, const ContourGrid& grid) {
  const int n = grid.size();
  CMatrix M(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) M(j, k) = kernel(grid.nodes[j], grid.nodes[k]) * grid.weights[k];
  return M;
}

cplx det_identity_minus(const CMatrix& M, cplx lambda, double pivot_floor) {
  const Eigen::Index n = M.rows();
  if (n == 0 || lambda == cplx{0.0, 0.0}) return {1.0, 0.0};
  CMatrix A = CMatrix::Identity(n, n) - lambda * M;
  const double scale = A.rowwise().norm().maxCoeff();
  Eigen::PartialPivLU<CMatrix> lu(A);
  const CMatrix& U = lu.matrixLU();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(U(i, i)) > pivot_floor * scale))
      fail(ErrorCode::Singular, "Fredholm matrix is numerically singular");
  }
  return lu.determinant();
}

FredholmPencil::FredholmPencil(const CMatrix& M) {
  if (M.rows() == 0) return;
  Eigen::HessenbergDecomposition<CMatrix> decomposition(M);
  hessenberg_ = decomposition.matrixH();
}

cplx FredholmPencil::det_identity_minus(cplx lambda) const {
  const Eigen::Index n = hessenberg_.rows();
  if (n == 0 || lambda == cplx{0.0, 0.0}) return {1.0, 0.0};
  CMatrix A = -lambda * hessenberg_;
  A.diagonal().array() += 1.0;
  const double scale = A.rowwise().norm().maxCoeff();
  cplx det{1.0, 0.0};
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k + 1 < n && std::abs(A(k + 1, k)) > std::abs(A(k, k))) {
      A.row(k).segment(k, n - k).swap(A.row(k + 1).segment(k, n - k));
      det = -det;
    }
    const cplx pivot = A(k, k);
    if (!(std::abs(pivot) > 1e-300 * scale))
      fail(ErrorCode::Singular, "Fredholm matrix is numerically singular");
    det *= pivot;
    if (k + 1 < n) {
      const cplx factor = A(k + 1, k) / pivot;
      A.row(k + 1).segment(k + 1, n - k - 1) -= factor * A.row(k).segment(k + 1, n - k - 1);
    }
  }
  return det;
}

FredholmEvaluation nystrom_fredholm_det(const Kernel& kernel, const ContourGrid& grid,
                                        cplx lambda) {
  FredholmEvaluation out;
  out.n_used = grid.size();
  if (lambda == cplx{0.0, 0.0}) {
    out.value = {1.0, 0.0};
    return out;
  }
  const CMatrix M = nystrom_matrix(kernel, grid);
  out.value = det_identity_minus(M, lambda);
  if (grid.size() % 2 == 0) {
    // The half grid reuses every other kernel evaluation.
    const int h = grid.size() / 2;
    CMatrix H(h, h);
    for (int j = 0; j < h; ++j)
      for (int k = 0; k < h; ++k) H(j, k) = 2.0 * M(2 * j, 2 * k);
    out.error_estimate = std::abs(out.value - det_identity_minus(H, lambda));
  }
  return out;
}

FredholmEvaluation fredholm_det_converged(const Kernel& kernel, cplx center, double radius,
                                          cplx lambda, int n_start, double tol, int n_cap) {
  for (int n = n_start; n <= n_cap; n *= 2) {
    FredholmEvaluation ev = nystrom_fredholm_det(kernel, make_circle(center, radius, n), lambda);
    if (ev.error_estimate < tol) return ev;
  }
  fail(ErrorCode::Convergence, "Fredholm determinant did not converge at the node cap");
}

cplx contour_integral_multi(const MultiIntegrand& f, const ContourGrid& grid, int k) {
  require(k >= 1, ErrorCode::Domain, "dimension must be positive");
  require(k <= 3, ErrorCode::Unsupported, "multidimensional contour integrals limited to k <= 3");
  const int n = grid.size();
  std::array<cplx, 3> point{};
  std::array<int, 3> idx{0, 0, 0};
  cplx sum{0.0, 0.0};
  while (true) {
    cplx weight{1.0, 0.0};
    for (int d = 0; d < k; ++d) {
      point[d] = grid.nodes[idx[d]];
      weight *= grid.weights[idx[d]];
    }
    sum += weight * f(std::span<const cplx>(point.data(), static_cast<std::size_t>(k)));
    int d = 0;
    while (d < k && ++idx[d] == n) idx[d++] = 0;
    if (d == k) break;
  }
  return sum;
}

}  // namespace asep
