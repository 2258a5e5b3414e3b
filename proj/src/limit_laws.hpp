#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "airy.hpp"

namespace asep {

enum class LimitLaw { G, F2, F1sq };

std::string to_string(LimitLaw law);
/// Accepts "g", "f2", "f1sq" (case-insensitive).
std::optional<LimitLaw> parse_law(const std::string& name);

/// Standard normal distribution function.
double gaussian_G(double s);

/// (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y), switching to a Taylor expansion
/// about the smaller argument when |x - y| < kAiryDiagonalBand. Symmetric in
/// (x, y) bit for bit.
double airy_kernel(double x, double y);
inline constexpr double kAiryDiagonalBand = 1e-3;

/// Ai'(x)^2 - x Ai(x)^2.
double airy_kernel_diagonal(double x);

struct LawNumerics {
  int n_quad = 60;
  double length = 12.0;  // the operator acts on (s, s + length]
  double tol = 1e-8;     // two-resolution agreement required
};

struct LawEvaluation {
  double value = 0.0;
  int n_used = 0;
  double error_estimate = 0.0;  // |value(n) - value(n / 2)|
};

/// det(I - K_Airy) on (s, s + L], Gauss-Legendre Nystrom with symmetric
/// square-root weights. Error(Domain) outside s in [-10, 6], Error(Precision)
/// when the two resolutions disagree by more than tol.
LawEvaluation tracy_widom_F2(double s, const LawNumerics& numerics = {});

/// Determinant of the rank-one perturbed kernel K_Airy(x,y) + Ai(x) V(y),
/// V(y) = 1 - int_y^inf Ai, evaluated directly.
LawEvaluation tracy_widom_F1sq(double s, const LawNumerics& numerics = {});

/// Same quantity through det(I - A)(1 - <(I - A)^{-1} u, v>).
LawEvaluation tracy_widom_F1sq_lemma(double s, const LawNumerics& numerics = {});

LawEvaluation evaluate_law(LimitLaw law, double s, const LawNumerics& numerics = {});

/// Tabulated distribution function on a uniform grid.
struct DistributionTable {
  LimitLaw law = LimitLaw::G;
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> errors;
  int n_quad = 0;
  double length = 0.0;
  double tolerance = 0.0;  // max error estimate over the grid

  double s_min() const { return grid.front(); }
  double s_max() const { return grid.back(); }

  /// Monotone cubic (PCHIP) interpolation; Error(Range) outside the grid.
  double value_at(double s) const;
};

/// Error(Domain) unless s_min < s_max and step > 0; F2/F1sq need the grid
/// inside [-10, 6].
DistributionTable make_table(LimitLaw law, double s_min, double s_max, double step,
                             const LawNumerics& numerics = {}, int threads = 1);

/// Inverse of the interpolated table; Error(Range) unless p lies strictly
/// between the first and last tabulated values.
double quantile(const DistributionTable& table, double p);

/// CSV `s,F,err_estimate` with `#` header lines for law, n_quad and L.
void write_table_csv(std::ostream& os, const DistributionTable& table);

}  // namespace asep
