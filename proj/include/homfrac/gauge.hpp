#pragma once

#include <cstdint>
#include <string>

#include "homfrac/group.hpp"
#include "homfrac/types.hpp"

namespace homfrac {

enum class GaugeKind { koranyi, ball_gauge, parabolic, euclidean_power };

/// Homogeneous norm bound to a group: |e| = 0, |g^{-1}| = |g|,
/// |delta_lambda g| = lambda |g|, plus the triangle inequality for the
/// shipped (group, variant) pairs.
class Gauge {
 public:
  static Gauge koranyi(const GroupSpec& spec);
  static Gauge ball(const GroupSpec& spec, double r);
  static Gauge parabolic(const GroupSpec& spec);
  static Gauge euclidean_power(const GroupSpec& spec);

  /// "koranyi", "ball_gauge:0.5", "parabolic", "euclidean_power" (alias "euclidean").
  static Gauge parse(const GroupSpec& spec, const std::string& token);

  double operator()(const double* x) const;
  double operator()(const Vec& g) const { return (*this)(g.data()); }

  /// Exact coordinate bounding half-widths of the closed unit ball.
  Vec unit_ball_halfwidths() const;

  const GroupSpec& spec() const { return spec_; }
  GaugeKind kind() const { return kind_; }
  double ball_r() const { return r_; }
  bool horizontal_radial() const { return horizontal_radial_; }
  bool horizontal_even() const { return horizontal_even_; }
  std::string label() const;

 private:
  GroupSpec spec_;
  GaugeKind kind_ = GaugeKind::euclidean_power;
  double r_ = 0.5;
  int lcm_weight_ = 1;  // L in (sum x_j^{2L/d_j})^{1/(2L)}
  bool horizontal_radial_ = false;
  bool horizontal_even_ = true;

  double ball_eval(const double* x) const;
};

/// Left-invariant distance d(g,h) = |h^{-1} g|.
double gauge_distance(const Gauge& gauge, const Vec& g, const Vec& h);

struct GaugeReport {
  double triangle_max_violation = 0.0;
  double homogeneity_max_rel_err = 0.0;
  double symmetry_max_err = 0.0;
  double horizontal_probe_max_err = 0.0;
  bool radial_probe = false;  // rotation probe if true, sign-flip probe otherwise
  long long n_samples = 0;
  std::uint64_t seed = 0;
};

GaugeReport check_gauge_properties(const Gauge& gauge, long long n_samples, std::uint64_t seed);

}  // namespace homfrac
