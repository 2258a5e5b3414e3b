#pragma once

// Combinatorial building blocks shared by the exact formulas. Everything is
// templated on the field type so the same code runs in double precision and
// in exact rationals (mpq_class).

#include <cstdint>
#include <span>

#include "error.hpp"

namespace asep {

/// base^e for integer e (negative allowed, base != 0 then).
template <class T>
T ipow(const T& base, long e) {
  if (e < 0) return T(1) / ipow(base, -e);
  T result(1);
  T b(base);
  while (e > 0) {
    if (e & 1) result *= b;
    e >>= 1;
    if (e > 0) b *= b;
  }
  return result;
}

/// (1 - tau^a)/(1 - tau^b) written as a ratio of geometric sums, so the
/// tau -> 1 limit a/b comes out without a 0/0.
template <class T>
T geometric_ratio(int a, int b, const T& tau) {
  T num(0), den(0), power(1);
  const int top = a > b ? a : b;
  for (int i = 0; i < top; ++i) {
    if (i < a) num += power;
    if (i < b) den += power;
    power *= tau;
  }
  return num / den;
}

/// Gaussian (tau-)binomial coefficient [N choose n]_tau.
template <class T>
T tau_binomial(int N, int n, const T& tau) {
  require(n >= 0 && n <= N, ErrorCode::Domain, "tau_binomial requires 0 <= n <= N");
  T result(1);
  for (int j = 1; j <= n; ++j) result *= geometric_ratio(N - j + 1, j, tau);
  return result;
}

/// Coefficient c_{m,k} of the finite-configuration series; zero for m > k.
template <class T>
T c_mk(int m, int k, const T& p, const T& q) {
  require(m >= 1 && k >= 1, ErrorCode::Domain, "c_mk requires m, k >= 1");
  if (m > k) return T(0);
  const T tau = p / q;
  T value = ipow(q, static_cast<long>(k) * (k - 1) / 2) *
            ipow(tau, static_cast<long>(m) * (m - 1) / 2) *
            ipow(tau, -static_cast<long>(k) * m) * tau_binomial(k - 1, k - m, tau);
  if (m % 2 == 0) value = -value;
  return value;
}

/// #{(u, v) : u in U, v in V, u >= v}.
inline std::int64_t sigma_count(std::span<const long> U, std::span<const long> V) {
  std::int64_t count = 0;
  for (long u : U)
    for (long v : V)
      if (u >= v) ++count;
  return count;
}

/// Closed form of sum over S <= Y <= [1, N] of rho^|Y| (1-rho)^(N-|Y|) tau^sigma(S,Y),
/// valid for every N >= max S. S must be strictly increasing positive integers.
template <class T>
T bernoulli_weight_closed_form(std::span<const long> S, const T& rho, const T& tau) {
  require(!S.empty(), ErrorCode::Domain, "S must be nonempty");
  long previous = 0;
  for (long s : S) {
    require(s > previous, ErrorCode::Domain, "S must be strictly increasing positive sites");
    previous = s;
  }
  const long k = static_cast<long>(S.size());
  T value = ipow(tau, k * (k + 1) / 2) * ipow(rho, k);
  previous = 0;
  for (long i = 1; i <= k; ++i) {
    const long s = S[static_cast<std::size_t>(i - 1)];
    const long gap = s - previous - 1;
    const T factor = T(1) - rho + ipow(tau, k - i + 1) * rho;
    value *= ipow(factor, gap);
    previous = s;
  }
  return value;
}

}  // namespace asep
