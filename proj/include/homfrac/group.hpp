#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homfrac/types.hpp"

namespace homfrac {

/// One structure constant c of [X_i, X_j] = sum_k c_{ij}^k X_k,
/// stored for i < j; the i > j half is implied by antisymmetry.
struct BracketTerm {
  int i, j, k;  // 0-based
  double c;
};

/// Graded nilpotent Lie algebra in a fixed eigenbasis of the dilations.
/// Points of the group are held in exponential coordinates of the first
/// kind, as plain coordinate vectors.
class GroupSpec {
 public:
  std::string name;
  int n = 0;
  Vec weights;                       // d_1..d_n, d_1 = 1, nondecreasing
  std::vector<BracketTerm> brackets; // i < j entries only

  double Q() const { return weights.sum(); }
  int m() const {
    int c = 0;
    for (int j = 0; j < n; ++j)
      if (weights[j] == 1.0) ++c;
    return c;
  }
  int step() const { return n == 0 ? 0 : static_cast<int>(std::floor(weights[n - 1])); }
  bool abelian() const { return brackets.empty(); }

  /// [x,y]_k = sum_{ij} x_i y_j c_{ij}^k, raw-buffer form for hot loops.
  void bracket_into(const double* x, const double* y, double* out) const {
    for (int k = 0; k < n; ++k) out[k] = 0.0;
    for (const auto& b : brackets) {
      double v = b.c * (x[b.i] * y[b.j] - x[b.j] * y[b.i]);
      out[b.k] += v;
    }
  }

  /// Group product exp^{-1}(exp(g) exp(h)) from the Baker-Campbell-Hausdorff
  /// series, truncated at bracket length 4. Exact for step <= 4.
  void multiply_into(const double* g, const double* h, double* out) const;

  void inverse_into(const double* g, double* out) const {
    for (int k = 0; k < n; ++k) out[k] = -g[k];
  }

  void dilate_into(double lambda, const double* g, double* out) const {
    for (int k = 0; k < n; ++k) out[k] = std::pow(lambda, weights[k]) * g[k];
  }
};

struct ValidationIssue {
  std::string check;
  std::string detail;
};

struct ValidationReport {
  bool weights_ok = true;
  bool antisymmetry_ok = true;
  bool grading_ok = true;
  bool jacobi_ok = true;
  bool step_supported = true;
  std::vector<ValidationIssue> issues;
  bool pass() const {
    return weights_ok && antisymmetry_ok && grading_ok && jacobi_ok && step_supported;
  }
};

ValidationReport validate_spec(const GroupSpec& spec);

Vec multiply(const GroupSpec& spec, const Vec& g, const Vec& h);
Vec inverse(const GroupSpec& spec, const Vec& g);
Vec dilate(const GroupSpec& spec, double lambda, const Vec& g);
Vec bracket(const GroupSpec& spec, const Vec& x, const Vec& y);
inline Vec identity(const GroupSpec& spec) { return Vec::Zero(spec.n); }

/// Built-in groups: euclidean(n, weights), heisenberg(n), parabolic_r2.
GroupSpec builtin_group(const std::string& name, int dim = 0, const Vec& weights = Vec());

/// "heisenberg:2", "euclidean:2:1,1", "parabolic_r2", or a JSON file path.
GroupSpec group_from_token(const std::string& token);

GroupSpec load_group_json(const std::string& path);

}  // namespace homfrac
