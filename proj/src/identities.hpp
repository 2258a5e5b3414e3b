#pragma once

// Exact-rational checks of the algebraic identities behind the Fredholm
// representation.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace asep {

/// Free variables of the identities. Construct through make_rational_point so
/// that q = 1 - p and tau = p / q hold.
struct RationalPoint {
  std::vector<mpq_class> xi;
  mpq_class p, q, rho, tau;

  int k() const { return static_cast<int>(xi.size()); }
};

/// Error(Domain) unless 0 < p < 1, 0 < rho <= 1 and the xi are distinct.
RationalPoint make_rational_point(std::vector<mpq_class> xi, const mpq_class& p,
                                  const mpq_class& rho);

/// Signed sum over permutations of the ordered product with denominators
/// xi_s(i) ... xi_s(k) - a_{k-i+1}, where a_j = 1 - rho + rho tau^j.
/// Error(Degenerate) on a vanishing denominator, Error(Unsupported) for k > 6.
mpq_class symmetrization_lhs(const RationalPoint& point);

/// q^{k(k-1)/2} prod_{i<j}(xi_i - xi_j) divided by
/// prod_i (xi_i - 1 + rho(1 - tau)) prod_{i != j}(p + q xi_i xi_j - xi_i).
mpq_class symmetrization_rhs(const RationalPoint& point);

/// Both sides of the identity with free constants: lhs denominators use
/// a_1..a_k, the rhs carries b_1 ... b_k and the pole c.
mpq_class generalized_lhs(const RationalPoint& point, const std::vector<mpq_class>& a);
mpq_class generalized_rhs(const RationalPoint& point, const std::vector<mpq_class>& b,
                          const mpq_class& c);

struct InductionConstants {
  mpq_class a;
  mpq_class b;
};

/// a_k = ((1 - c) tau^k + c - tau) / (1 - tau), b_k = q^{k-1}. Checks the
/// k = 1 endpoint (a_1 = c, b_1 = 1) and, with rho = (1 - c)/(1 - tau), that
/// a_k = 1 - rho + rho tau^k; a failed check raises Error(IdentityFailure).
/// Error(Domain) if tau = 1 or k < 1.
InductionConstants verify_induction_constants(int k, const mpq_class& c, const mpq_class& p);

/// Fraction-free (Bareiss) determinant; the matrix is row-major n x n.
mpq_class bareiss_determinant(std::vector<mpq_class> matrix, int n);

/// det(1/(p + q xi_i xi_j - xi_i)) against the closed product form.
/// Error(Degenerate) if some xi equals 1 or tau, or a denominator vanishes.
bool verify_cauchy_det_identity(const RationalPoint& point);

/// |sum_{k=m}^{k_max} [k-1 choose k-m]_tau z^k - prod_{j=1}^m z/(1 - tau^{m-j} z)|.
/// Error(Domain) unless |z| < 1 and 0 < tau < 1.
mpq_class verify_tau_binomial_sum(int m, const mpq_class& z, int k_max, const mpq_class& tau);

/// Random point with numerators and denominators bounded by `bound`. Points
/// where a denominator vanishes are redrawn up to max_retries times
/// (Error(Degenerate) after that). `retries` reports how many were needed.
RationalPoint random_admissible_point(int k, std::mt19937_64& rng, int& retries,
                                      int bound = 50, int max_retries = 10);

struct IdentityCase {
  std::string identity;
  int k = 0;
  int point = 0;
  bool passed = false;
  int retries = 0;
};

struct IdentityReport {
  std::vector<IdentityCase> cases;
  int failures = 0;
  bool negative_control_detected = false;
};

/// Runs both identities for k = 1..k_max with points_per_k points each, plus a
/// negative control that perturbs tau on the lhs and expects an inequality.
/// With `perturb_tau` every symmetrization case uses the shifted tau on its lhs, which
/// must make the suite fail.
IdentityReport run_identity_suite(int k_max, int points_per_k, std::uint64_t seed,
                                  bool perturb_tau = false);

}  // namespace asep
