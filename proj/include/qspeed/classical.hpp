#pragma once

// Classical distances between outcome distributions, generalized Fisher
// information and the statistical speeds and lower bounds built on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "matcore.hpp"

namespace qspeed {

inline constexpr double p_floor = 1e-12;

/// Nonnegative weights summing to one. Entries in [-1e-12, 0) are clipped to zero.
class ProbDist {
 public:
  explicit ProbDist(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw invalid_input("distribution must have at least one outcome");
    double sum = 0.0;
    for (double& x : w_) {
      if (!std::isfinite(x)) throw invalid_input("distribution has non-finite weight");
      if (x < -1e-12) throw invalid_input("distribution has negative weight " + std::to_string(x));
      if (x < 0.0) x = 0.0;
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw invalid_input("distribution weights sum to " + std::to_string(sum));
    }
  }

  const std::vector<double>& weights() const noexcept { return w_; }
  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }

 private:
  std::vector<double> w_;
};

/// Distribution p(theta) together with dp/dtheta.
class ParametricDist {
 public:
  ParametricDist(ProbDist weights, std::vector<double> derivative)
      : p_(std::move(weights)), dp_(std::move(derivative)) {
    if (dp_.size() != p_.size()) throw invalid_input("derivative length differs from weights");
    double sum = 0.0;
    for (double x : dp_) {
      if (!std::isfinite(x)) throw invalid_input("derivative has non-finite entry");
      sum += x;
    }
    if (std::abs(sum) > 1e-9) {
      throw invalid_input("derivative does not sum to zero: " + std::to_string(sum));
    }
  }

  const ProbDist& dist() const noexcept { return p_; }
  const std::vector<double>& weights() const noexcept { return p_.weights(); }
  const std::vector<double>& derivative() const noexcept { return dp_; }
  std::size_t size() const noexcept { return dp_.size(); }

 private:
  ProbDist p_;
  std::vector<double> dp_;
};

enum class DistanceFamily { power, schatten };

inline DistanceFamily parse_distance_family(const std::string& tag) {
  if (tag == "power") return DistanceFamily::power;
  if (tag == "schatten") return DistanceFamily::schatten;
  throw invalid_parameter("unknown family tag '" + tag + "' (expected power or schatten)");
}

namespace detail {

inline void require_same_length(const ProbDist& p, const ProbDist& q) {
  if (p.size() != q.size()) throw invalid_input("distributions have different lengths");
}

/// Scaled power sum (sum |x_i|^alpha)^(1/alpha); alpha = inf gives max |x_i|.
inline double lp_norm(const std::vector<double>& x, double alpha) {
  double top = 0.0;
  for (double v : x) top = std::max(top, std::abs(v));
  if (top == 0.0 || std::isinf(alpha)) return top;
  double sum = 0.0;
  for (double v : x) sum += std::pow(std::abs(v) / top, alpha);
  return top * std::pow(sum, 1.0 / alpha);
}

/// Single-outcome contribution p |p'/p|^alpha with the zero-probability conventions.
inline double fisher_term(double p, double dp, double alpha) {
  const double adp = std::abs(dp);
  if (p <= p_floor) {
    if (adp <= p_floor) return 0.0;
    return alpha == 1.0 ? adp : infinity;
  }
  if (alpha == 1.0) return adp;
  return p * std::pow(adp / p, alpha);
}

inline double gen_fisher_raw(const std::vector<double>& p, const std::vector<double>& dp, double alpha) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += fisher_term(p[i], dp[i], alpha);
  return sum;
}

}  // namespace detail

/// d_alpha(p, q) = (1/2 sum |p^(1/alpha) - q^(1/alpha)|^alpha)^(1/alpha).
inline double dist_alpha(const ProbDist& p, const ProbDist& q, double alpha) {
  require_alpha(alpha);
  detail::require_same_length(p, q);
  if (std::isinf(alpha)) throw invalid_parameter("dist_alpha requires finite alpha");
  std::vector<double> diff(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    diff[i] = std::pow(p[i], 1.0 / alpha) - std::pow(q[i], 1.0 / alpha);
  }
  return std::min(1.0, std::pow(0.5, 1.0 / alpha) * detail::lp_norm(diff, alpha));
}

/// (1/2 sum |p - q|^alpha)^(1/alpha).
inline double dist_schatten_alpha(const ProbDist& p, const ProbDist& q, double alpha) {
  require_alpha(alpha);
  detail::require_same_length(p, q);
  std::vector<double> diff(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) diff[i] = p[i] - q[i];
  const double scale = std::isinf(alpha) ? 1.0 : std::pow(0.5, 1.0 / alpha);
  return std::min(1.0, scale * detail::lp_norm(diff, alpha));
}

/// f_alpha = sum p |p'/p|^alpha; may be +inf when support moves and alpha > 1.
inline double gen_fisher(const ParametricDist& d, double alpha) {
  require_alpha(alpha);
  if (std::isinf(alpha)) throw invalid_parameter("gen_fisher requires finite alpha");
  return detail::gen_fisher_raw(d.weights(), d.derivative(), alpha);
}

struct SchattenFisher {
  double fisher;  // (sum |p'|^alpha)^(1/alpha)
  double speed;   // 2^(-1/alpha) * fisher
};

inline SchattenFisher schatten_fisher(const ParametricDist& d, double alpha) {
  require_alpha(alpha);
  const double f = detail::lp_norm(d.derivative(), alpha);
  const double scale = std::isinf(alpha) ? 1.0 : std::pow(2.0, -1.0 / alpha);
  return {f, scale * f};
}

/// power: s_alpha = (1/alpha)(f_alpha/2)^(1/alpha); schatten: 2^(-1/alpha) fisher.
inline double classical_speed(const ParametricDist& d, double alpha, DistanceFamily family) {
  switch (family) {
    case DistanceFamily::power: {
      const double f = gen_fisher(d, alpha);
      if (std::isinf(f)) return infinity;
      return std::pow(0.5 * f, 1.0 / alpha) / alpha;
    }
    case DistanceFamily::schatten:
      return schatten_fisher(d, alpha).speed;
  }
  throw invalid_parameter("unknown distance family");
}

/// |d<M>/dtheta| / (sum p |m - g|^beta)^(1/beta) with beta = alpha/(alpha-1); never exceeds f_alpha^(1/alpha).
inline double moment_lower_bound(const ParametricDist& d, const std::vector<double>& outcomes, double alpha,
                                 double g) {
  if (!(alpha > 1.0) || std::isinf(alpha)) throw invalid_parameter("moment bound requires 1 < alpha < inf");
  if (outcomes.size() != d.size()) throw invalid_input("outcome values and distribution differ in length");
  const double beta = alpha / (alpha - 1.0);
  double slope = 0.0;
  double moment = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(outcomes[i])) throw invalid_input("outcome value is not finite");
    slope += d.derivative()[i] * outcomes[i];
    moment += d.weights()[i] * std::pow(std::abs(outcomes[i] - g), beta);
  }
  if (moment <= 0.0) throw undefined_quantity("moment bound undefined: all mass sits at the reference value");
  return std::abs(slope) / std::pow(moment, 1.0 / beta);
}

/// Lower bound 1/f_alpha^(1/alpha) on the beta-th absolute central moment of unbiased estimators.
inline double barankin_bound(const ParametricDist& d, double beta) {
  if (!(beta > 1.0) || std::isinf(beta)) throw invalid_parameter("Barankin bound requires 1 < beta < inf");
  const double alpha = beta / (beta - 1.0);
  const double f = gen_fisher(d, alpha);
  if (f == 0.0) return infinity;
  if (std::isinf(f)) return 0.0;
  return 1.0 / std::pow(f, 1.0 / alpha);
}

struct Snapshot {
  double theta;
  ProbDist dist;
};

struct SpeedFit {
  double speed;
  double residual;  // root-mean-square residual of the fit
  int points_used;  // excluding the reference snapshot
};

inline constexpr double fit_window_distance = 0.2;

/// Least-squares slope through the origin of distance-to-first-snapshot against theta offset.
inline SpeedFit speed_from_samples(const std::vector<Snapshot>& snapshots, double alpha, DistanceFamily family) {
  require_alpha(alpha);
  if (snapshots.size() < 3) throw invalid_input("speed fit needs at least 3 snapshots");
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    if (!(snapshots[i].theta > snapshots[i - 1].theta)) {
      throw invalid_input("snapshot thetas must be strictly increasing");
    }
  }
  const Snapshot& ref = snapshots.front();
  std::vector<double> dt;
  std::vector<double> dist;
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    const double d = family == DistanceFamily::power ? dist_alpha(snapshots[i].dist, ref.dist, alpha)
                                                     : dist_schatten_alpha(snapshots[i].dist, ref.dist, alpha);
    if (dt.size() >= 2 && d >= fit_window_distance) break;
    dt.push_back(snapshots[i].theta - ref.theta);
    dist.push_back(d);
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < dt.size(); ++i) {
    sxy += dt[i] * dist[i];
    sxx += dt[i] * dt[i];
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < dt.size(); ++i) {
    const double r = dist[i] - slope * dt[i];
    ss += r * r;
  }
  return {slope, std::sqrt(ss / static_cast<double>(dt.size())), static_cast<int>(dt.size())};
}

}  // namespace qspeed
