#include "limit_laws.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "error.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace asep {

namespace {

constexpr double kLawSMin = -10.0;
constexpr double kLawSMax = 6.0;

// Kernel value from precomputed Airy data; x <= y is assumed by callers.
double airy_kernel_ordered(double x, const AiryValue& ax, double y, const AiryValue& ay) {
  const double h = y - x;
  if (h >= kAiryDiagonalBand) return (ax.ai * ay.ai_prime - ax.ai_prime * ay.ai) / (x - y);
  // Derivatives Ai^(j)(x) from Ai'' = x Ai, differentiated j times.
  constexpr int kTerms = 12;
  std::array<double, kTerms + 2> d{};
  d[0] = ax.ai;
  d[1] = ax.ai_prime;
  for (int j = 0; j + 2 < static_cast<int>(d.size()); ++j)
    d[j + 2] = x * d[j] + (j > 0 ? j * d[j - 1] : 0.0);
  double sum = 0.0;
  double power = 1.0;  // h^{j-1} / j!
  for (int j = 1; j <= kTerms; ++j) {
    power /= j;
    sum += power * (d[0] * d[j + 1] - d[1] * d[j]);
    power *= h;
  }
  return -sum;
}

double airy_kernel_pair(double x, const AiryValue& ax, double y, const AiryValue& ay) {
  return x <= y ? airy_kernel_ordered(x, ax, y, ay) : airy_kernel_ordered(y, ay, x, ax);
}

struct Discretization {
  std::vector<double> nodes;
  std::vector<double> root_weights;
  std::vector<AiryValue> airy_values;
};

Discretization discretize(double s, int n, double length) {
  const GaussRule rule = gauss_legendre(n);
  Discretization d;
  for (int i = 0; i < n; ++i) {
    const double x = s + 0.5 * length * (rule.nodes[i] + 1.0);
    d.nodes.push_back(x);
    d.root_weights.push_back(std::sqrt(0.5 * length * rule.weights[i]));
    d.airy_values.push_back(airy(x));
  }
  return d;
}

Eigen::MatrixXd weighted_airy_matrix(const Discretization& d) {
  const int n = static_cast<int>(d.nodes.size());
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double k = airy_kernel_pair(d.nodes[i], d.airy_values[i], d.nodes[j], d.airy_values[j]);
      A(i, j) = A(j, i) = d.root_weights[i] * k * d.root_weights[j];
    }
  return A;
}

double f2_at(double s, int n, double length) {
  const Discretization d = discretize(s, n, length);
  const Eigen::MatrixXd A = weighted_airy_matrix(d);
  return (Eigen::MatrixXd::Identity(n, n) - A).partialPivLu().determinant();
}

struct RankOne {
  Eigen::VectorXd u;  // sqrt(w) Ai(x)
  Eigen::VectorXd v;  // sqrt(w) (1 - int_y^inf Ai)
};

RankOne rank_one_terms(const Discretization& d) {
  const int n = static_cast<int>(d.nodes.size());
  const std::vector<double> tails = airy_tail_integrals(d.nodes);
  RankOne r{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    r.u(i) = d.root_weights[i] * d.airy_values[i].ai;
    r.v(i) = d.root_weights[i] * (1.0 - tails[static_cast<std::size_t>(i)]);
  }
  return r;
}

double f1sq_direct_at(double s, int n, double length) {
  const Discretization d = discretize(s, n, length);
  const RankOne r = rank_one_terms(d);
  const Eigen::MatrixXd A = weighted_airy_matrix(d) + r.u * r.v.transpose();
  return (Eigen::MatrixXd::Identity(n, n) - A).partialPivLu().determinant();
}

double f1sq_lemma_at(double s, int n, double length) {
  const Discretization d = discretize(s, n, length);
  const RankOne r = rank_one_terms(d);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(n, n) -
                                                weighted_airy_matrix(d));
  const Eigen::VectorXd solved = lu.solve(r.u);
  return lu.determinant() * (1.0 - r.v.dot(solved));
}

template <class F>
LawEvaluation two_resolution(double s, const LawNumerics& numerics, F&& at) {
  require(std::isfinite(s) && s >= kLawSMin && s <= kLawSMax, ErrorCode::Domain,
          "s outside the tabulated range [-10, 6]");
  require(numerics.n_quad >= 4 && numerics.length > 0.0, ErrorCode::Domain,
          "need n_quad >= 4 and a positive length");
  LawEvaluation ev;
  ev.n_used = numerics.n_quad;
  ev.value = at(s, numerics.n_quad, numerics.length);
  ev.error_estimate = std::abs(ev.value - at(s, numerics.n_quad / 2, numerics.length));
  if (!(ev.error_estimate <= numerics.tol))
    fail(ErrorCode::Precision, "limit law: resolutions " + std::to_string(numerics.n_quad) +
                                   " and " + std::to_string(numerics.n_quad / 2) +
                                   " disagree beyond tolerance");
  return ev;
}

// Fritsch-Carlson slope at node i of a uniform grid.
double pchip_slope(const std::vector<double>& y, std::size_t i, double h) {
  const std::size_t n = y.size();
  if (n == 2) return (y[1] - y[0]) / h;
  if (i == 0 || i == n - 1) {
    const double d0 = i == 0 ? (y[1] - y[0]) / h : (y[n - 1] - y[n - 2]) / h;
    const double d1 = i == 0 ? (y[2] - y[1]) / h : (y[n - 2] - y[n - 3]) / h;
    double slope = 0.5 * (3.0 * d0 - d1);
    if (slope * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(slope) > std::abs(3.0 * d0)) slope = 3.0 * d0;
    return slope;
  }
  const double left = (y[i] - y[i - 1]) / h;
  const double right = (y[i + 1] - y[i]) / h;
  if (left * right <= 0.0) return 0.0;
  return 2.0 / (1.0 / left + 1.0 / right);
}

}  // namespace

std::string to_string(LimitLaw law) {
  switch (law) {
    case LimitLaw::G: return "G";
    case LimitLaw::F2: return "F2";
    case LimitLaw::F1sq: return "F1sq";
  }
  return "unknown";
}

std::optional<LimitLaw> parse_law(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "g") return LimitLaw::G;
  if (lower == "f2") return LimitLaw::F2;
  if (lower == "f1sq") return LimitLaw::F1sq;
  return std::nullopt;
}

double gaussian_G(double s) { return 0.5 * std::erfc(-s / std::numbers::sqrt2); }

double airy_kernel(double x, double y) { return airy_kernel_pair(x, airy(x), y, airy(y)); }

double airy_kernel_diagonal(double x) {
  const AiryValue a = airy(x);
  return a.ai_prime * a.ai_prime - x * a.ai * a.ai;
}

LawEvaluation tracy_widom_F2(double s, const LawNumerics& numerics) {
  return two_resolution(s, numerics, f2_at);
}

LawEvaluation tracy_widom_F1sq(double s, const LawNumerics& numerics) {
  return two_resolution(s, numerics, f1sq_direct_at);
}

LawEvaluation tracy_widom_F1sq_lemma(double s, const LawNumerics& numerics) {
  return two_resolution(s, numerics, f1sq_lemma_at);
}

LawEvaluation evaluate_law(LimitLaw law, double s, const LawNumerics& numerics) {
  switch (law) {
    case LimitLaw::G: return LawEvaluation{gaussian_G(s), 0, 0.0};
    case LimitLaw::F2: return tracy_widom_F2(s, numerics);
    case LimitLaw::F1sq: return tracy_widom_F1sq(s, numerics);
  }
  fail(ErrorCode::Domain, "unknown law");
}

double DistributionTable::value_at(double s) const {
  require(grid.size() >= 2, ErrorCode::Range, "table needs at least two points");
  require(s >= s_min() && s <= s_max(), ErrorCode::Range, "argument outside the table");
  const double h = grid[1] - grid[0];
  std::size_t i = std::min(static_cast<std::size_t>((s - s_min()) / h), grid.size() - 2);
  const double t = (s - grid[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values[i] + (t3 - 2 * t2 + t) * h * pchip_slope(values, i, h) +
         (-2 * t3 + 3 * t2) * values[i + 1] + (t3 - t2) * h * pchip_slope(values, i + 1, h);
}

DistributionTable make_table(LimitLaw law, double s_min, double s_max, double step,
                             const LawNumerics& numerics, int threads) {
  require(std::isfinite(s_min) && std::isfinite(s_max) && s_min < s_max, ErrorCode::Domain,
          "need s_min < s_max");
  require(step > 0.0, ErrorCode::Domain, "step must be positive");
  if (law != LimitLaw::G)
    require(s_min >= kLawSMin && s_max <= kLawSMax, ErrorCode::Domain,
            "F2 and F1sq tables are limited to [-10, 6]");
  const std::size_t count = static_cast<std::size_t>(std::floor((s_max - s_min) / step + 1e-9)) + 1;
  require(count >= 2, ErrorCode::Domain, "table needs at least two grid points");

  DistributionTable table;
  table.law = law;
  table.n_quad = law == LimitLaw::G ? 0 : numerics.n_quad;
  table.length = law == LimitLaw::G ? 0.0 : numerics.length;
  table.grid.resize(count);
  table.values.resize(count);
  table.errors.resize(count);
  for (std::size_t i = 0; i < count; ++i) table.grid[i] = s_min + static_cast<double>(i) * step;

  parallel_for(count, threads, [&](std::size_t i) {
    const LawEvaluation ev = evaluate_law(law, table.grid[i], numerics);
    table.values[i] = std::clamp(ev.value, 0.0, 1.0);
    table.errors[i] = ev.error_estimate;
  });
  table.tolerance = *std::max_element(table.errors.begin(), table.errors.end());
  return table;
}

double quantile(const DistributionTable& table, double p) {
  require(table.grid.size() >= 2, ErrorCode::Range, "table needs at least two points");
  require(p > table.values.front() && p < table.values.back(), ErrorCode::Range,
          "probability outside the tabulated range");
  const auto it = std::lower_bound(table.values.begin(), table.values.end(), p);
  const std::size_t hi = static_cast<std::size_t>(it - table.values.begin());
  double lo_s = table.grid[hi - 1], hi_s = table.grid[hi];
  for (int iter = 0; iter < 200 && hi_s - lo_s > 1e-15 * (1.0 + std::abs(lo_s)); ++iter) {
    const double mid = 0.5 * (lo_s + hi_s);
    (table.value_at(mid) < p ? lo_s : hi_s) = mid;
  }
  return 0.5 * (lo_s + hi_s);
}

void write_table_csv(std::ostream& os, const DistributionTable& table) {
  const auto precision = os.precision(17);
  os << "# law=" << to_string(table.law) << "\n# n_quad=" << table.n_quad
     << "\n# L=" << table.length << "\ns,F,err_estimate\n";
  for (std::size_t i = 0; i < table.grid.size(); ++i)
    os << table.grid[i] << ',' << table.values[i] << ',' << table.errors[i] << '\n';
  os.precision(precision);
}

}  // namespace asep
