#include "identities.hpp"

#include <algorithm>
#include <numeric>

#include "combinatorics.hpp"
#include "error.hpp"

namespace asep {

namespace {

mpq_class checked_inverse(const mpq_class& value) {
  if (value == 0) fail(ErrorCode::Degenerate, "vanishing denominator at the sample point");
  return 1 / value;
}

mpq_class pair_factor(const RationalPoint& pt, const mpq_class& a, const mpq_class& b) {
  return pt.p + pt.q * a * b - a;
}

int permutation_sign(const std::vector<int>& perm) {
  int inversions = 0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

std::vector<mpq_class> symmetrization_constants(const RationalPoint& pt) {
  std::vector<mpq_class> a(static_cast<std::size_t>(pt.k()));
  mpq_class power = pt.tau;
  for (auto& value : a) {
    value = 1 - pt.rho + pt.rho * power;
    power *= pt.tau;
  }
  return a;
}

mpq_class density_pole(const RationalPoint& pt) { return 1 - pt.rho * (1 - pt.tau); }

mpq_class abs_value(const mpq_class& v) { return v < 0 ? mpq_class(-v) : v; }

// Every denominator appearing in either identity is nonzero.
bool admissible(const RationalPoint& pt) {
  const int k = pt.k();
  const mpq_class c = density_pole(pt);
  for (int i = 0; i < k; ++i) {
    if (pt.xi[i] == 0 || pt.xi[i] == 1 || pt.xi[i] == pt.tau || pt.xi[i] == c) return false;
    for (int j = 0; j < k; ++j) {
      if (i != j && pt.xi[i] == pt.xi[j]) return false;
      if (pair_factor(pt, pt.xi[i], pt.xi[j]) == 0) return false;
    }
  }
  const std::vector<mpq_class> a = symmetrization_constants(pt);
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    mpq_class product = 1;
    int size = 0;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) {
        product *= pt.xi[i];
        ++size;
      }
    if (product == a[static_cast<std::size_t>(size - 1)]) return false;
  }
  return true;
}

mpq_class random_rational(std::mt19937_64& rng, int lo_num, int hi_num, int bound) {
  std::uniform_int_distribution<int> num(lo_num, hi_num);
  std::uniform_int_distribution<int> den(1, bound);
  mpq_class value(num(rng), den(rng));
  value.canonicalize();
  return value;
}

}  // namespace

RationalPoint make_rational_point(std::vector<mpq_class> xi, const mpq_class& p,
                                  const mpq_class& rho) {
  require(p > 0 && p < 1, ErrorCode::Domain, "p must lie in (0, 1)");
  require(rho > 0 && rho <= 1, ErrorCode::Domain, "rho must lie in (0, 1]");
  for (std::size_t i = 0; i < xi.size(); ++i)
    for (std::size_t j = i + 1; j < xi.size(); ++j)
      require(xi[i] != xi[j], ErrorCode::Domain, "xi must be pairwise distinct");
  RationalPoint pt;
  pt.xi = std::move(xi);
  pt.p = p;
  pt.q = 1 - p;
  pt.rho = rho;
  pt.tau = pt.p / pt.q;
  return pt;
}

mpq_class generalized_lhs(const RationalPoint& pt, const std::vector<mpq_class>& a) {
  const int k = pt.k();
  require(k >= 1, ErrorCode::Domain, "need at least one variable");
  require(k <= 6, ErrorCode::Unsupported, "permutation sums limited to k <= 6");
  require(static_cast<int>(a.size()) >= k, ErrorCode::Domain, "need constants a_1..a_k");
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  mpq_class total = 0;
  do {
    mpq_class term = permutation_sign(perm);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        term *= checked_inverse(pair_factor(pt, pt.xi[perm[i]], pt.xi[perm[j]]));
    mpq_class tail = 1;
    for (int i = k - 1; i >= 0; --i) {
      tail *= pt.xi[perm[i]];
      term *= checked_inverse(tail - a[static_cast<std::size_t>(k - 1 - i)]);
    }
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

mpq_class generalized_rhs(const RationalPoint& pt, const std::vector<mpq_class>& b,
                          const mpq_class& c) {
  const int k = pt.k();
  require(static_cast<int>(b.size()) >= k, ErrorCode::Domain, "need constants b_1..b_k");
  mpq_class value = 1;
  for (int i = 0; i < k; ++i) {
    value *= b[static_cast<std::size_t>(i)];
    value *= checked_inverse(pt.xi[i] - c);
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      if (i < j) value *= pt.xi[i] - pt.xi[j];
      value *= checked_inverse(pair_factor(pt, pt.xi[i], pt.xi[j]));
    }
  }
  return value;
}

mpq_class symmetrization_lhs(const RationalPoint& point) {
  return generalized_lhs(point, symmetrization_constants(point));
}

mpq_class symmetrization_rhs(const RationalPoint& point) {
  std::vector<mpq_class> b(static_cast<std::size_t>(point.k()));
  mpq_class power = 1;
  for (auto& value : b) {
    value = power;
    power *= point.q;
  }
  return generalized_rhs(point, b, density_pole(point));
}

InductionConstants verify_induction_constants(int k, const mpq_class& c, const mpq_class& p) {
  require(k >= 1, ErrorCode::Domain, "k must be >= 1");
  const mpq_class q = 1 - p;
  require(q != 0, ErrorCode::Domain, "q must be nonzero");
  const mpq_class tau = p / q;
  require(tau != 1, ErrorCode::Domain, "the induction constants need tau != 1");
  auto constants = [&](int j) {
    return InductionConstants{((1 - c) * ipow(tau, j) + c - tau) / (1 - tau), ipow(q, j - 1)};
  };
  const InductionConstants first = constants(1);
  if (first.a != c || first.b != 1)
    fail(ErrorCode::IdentityFailure, "induction constants disagree with the k = 1 endpoint");
  const InductionConstants result = constants(k);
  const mpq_class rho = (1 - c) / (1 - tau);
  if (result.a != 1 - rho + rho * ipow(tau, k))
    fail(ErrorCode::IdentityFailure, "a_k differs from 1 - rho + rho tau^k");
  return result;
}

mpq_class bareiss_determinant(std::vector<mpq_class> m, int n) {
  require(n >= 0 && static_cast<int>(m.size()) == n * n, ErrorCode::Domain,
          "matrix must be n x n");
  if (n == 0) return 1;
  auto at = [&](int i, int j) -> mpq_class& { return m[static_cast<std::size_t>(i * n + j)]; };
  mpq_class previous = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (at(k, k) == 0) {
      int swap_row = k + 1;
      while (swap_row < n && at(swap_row, k) == 0) ++swap_row;
      if (swap_row == n) return 0;
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(swap_row, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j)
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / previous;
      at(i, k) = 0;
    }
    previous = at(k, k);
  }
  return sign * at(n - 1, n - 1);
}

bool verify_cauchy_det_identity(const RationalPoint& pt) {
  const int k = pt.k();
  require(k >= 1, ErrorCode::Domain, "need at least one variable");
  require(k <= 5, ErrorCode::Unsupported, "determinant identity checked for k <= 5");
  std::vector<mpq_class> matrix(static_cast<std::size_t>(k * k));
  mpq_class closed = (k % 2 == 0 ? 1 : -1);
  closed *= ipow(mpq_class(pt.p * pt.q), static_cast<long>(k) * (k - 1) / 2);
  for (int i = 0; i < k; ++i) {
    if (pt.xi[i] == 1 || pt.q * pt.xi[i] == pt.p)
      fail(ErrorCode::Degenerate, "xi coincides with 1 or tau");
    closed *= checked_inverse((1 - pt.xi[i]) * (pt.q * pt.xi[i] - pt.p));
    for (int j = 0; j < k; ++j) {
      const mpq_class inverse = checked_inverse(pair_factor(pt, pt.xi[i], pt.xi[j]));
      matrix[static_cast<std::size_t>(i * k + j)] = inverse;
      if (i != j) closed *= (pt.xi[j] - pt.xi[i]) * inverse;
    }
  }
  return bareiss_determinant(std::move(matrix), k) == closed;
}

mpq_class verify_tau_binomial_sum(int m, const mpq_class& z, int k_max, const mpq_class& tau) {
  require(m >= 1 && k_max >= m, ErrorCode::Domain, "need 1 <= m <= k_max");
  require(abs_value(z) < 1, ErrorCode::Domain, "the series diverges for |z| >= 1");
  require(tau > 0 && tau < 1, ErrorCode::Domain, "tau must lie in (0, 1)");
  mpq_class partial = 0;
  for (int k = m; k <= k_max; ++k) partial += tau_binomial(k - 1, k - m, tau) * ipow(z, k);
  mpq_class product = 1;
  for (int j = 1; j <= m; ++j) product *= z / (1 - ipow(tau, m - j) * z);
  return abs_value(partial - product);
}

RationalPoint random_admissible_point(int k, std::mt19937_64& rng, int& retries, int bound,
                                      int max_retries) {
  require(k >= 1, ErrorCode::Domain, "need at least one variable");
  require(bound >= 2, ErrorCode::Domain, "bound must be >= 2");
  for (retries = 0; retries <= max_retries; ++retries) {
    std::uniform_int_distribution<int> den(2, bound);
    const int p_den = den(rng);
    const mpq_class p(std::uniform_int_distribution<int>(1, p_den - 1)(rng), p_den);
    const int rho_den = den(rng);
    const mpq_class rho(std::uniform_int_distribution<int>(1, rho_den)(rng), rho_den);
    std::vector<mpq_class> xi;
    for (int i = 0; i < k; ++i) xi.push_back(random_rational(rng, -bound, bound, bound));
    bool distinct = true;
    for (int i = 0; i < k && distinct; ++i)
      for (int j = i + 1; j < k; ++j) distinct = distinct && xi[i] != xi[j];
    if (!distinct) continue;
    mpq_class p_canonical = p, rho_canonical = rho;
    p_canonical.canonicalize();
    rho_canonical.canonicalize();
    RationalPoint pt = make_rational_point(std::move(xi), p_canonical, rho_canonical);
    if (admissible(pt)) return pt;
  }
  fail(ErrorCode::Degenerate, "no admissible point within the retry budget");
}

namespace {

RationalPoint with_shifted_tau(RationalPoint pt) {
  pt.tau += mpq_class(1, 1000);
  return pt;
}

}  // namespace

IdentityReport run_identity_suite(int k_max, int points_per_k, std::uint64_t seed,
                                  bool perturb_tau) {
  require(k_max >= 1 && k_max <= 6, ErrorCode::Domain, "k_max must lie in 1..6");
  require(points_per_k >= 1, ErrorCode::Domain, "points_per_k must be >= 1");
  std::mt19937_64 rng(seed);
  IdentityReport report;
  for (int k = 1; k <= k_max; ++k) {
    for (int n = 0; n < points_per_k; ++n) {
      int retries = 0;
      const RationalPoint pt = random_admissible_point(k, rng, retries);
      const mpq_class lhs = perturb_tau ? symmetrization_lhs(with_shifted_tau(pt)) : symmetrization_lhs(pt);
      IdentityCase symmetrization{"symmetrization", k, n, lhs == symmetrization_rhs(pt), retries};
      report.cases.push_back(symmetrization);
      if (k <= 5) {
        IdentityCase cauchy{"cauchy_det", k, n, verify_cauchy_det_identity(pt), retries};
        report.cases.push_back(cauchy);
      }
    }
  }
  for (const IdentityCase& c : report.cases)
    if (!c.passed) ++report.failures;

  // Negative control: the lhs with a shifted tau must no longer match.
  for (int attempt = 0; attempt < 10 && !report.negative_control_detected; ++attempt) {
    int retries = 0;
    const RationalPoint pt = random_admissible_point(3, rng, retries);
    try {
      report.negative_control_detected = symmetrization_lhs(with_shifted_tau(pt)) != symmetrization_rhs(pt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Degenerate) throw;
    }
  }
  return report;
}

}  // namespace asep
