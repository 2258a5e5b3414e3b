#pragma once

#include <span>
#include <vector>

namespace asep {

struct AiryValue {
  double ai = 0.0;
  double ai_prime = 0.0;
};

/// Method thresholds of the Airy evaluation: the Maclaurin series is summed in
/// quadruple precision for |x| <= series_radius; asymptotic expansions are
/// used beyond it.
struct AiryEvaluator {
  double series_radius = 8.0;
  double min_x = -20.0;
  double max_x = 30.0;

  /// Ai(x) and Ai'(x); Error(Domain) outside [min_x, max_x].
  AiryValue operator()(double x) const;
};

AiryValue airy(double x);
double airy_ai(double x);

/// For each y, the integral of Ai over [y, infinity). Error(Domain) if some y
/// lies outside [-20, 30].
std::vector<double> airy_tail_integrals(std::span<const double> ys);

}  // namespace asep
