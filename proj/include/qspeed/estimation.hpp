#pragma once

// Monte Carlo checks of estimation bounds: state discrimination, Cramer-Rao
// and the median-unbiased (Stangenhaus) bound, classical and quantum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "classical.hpp"
#include "matcore.hpp"
#include "numerics.hpp"
#include "quantum.hpp"
#include "random.hpp"

namespace qspeed {

// ---------------------------------------------------------------------------
// discrimination

/// (1 + D_1(rho, sigma)) / 2.
inline double discrimination_probability(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return 0.5 * (1.0 + trace_distance(rho, sigma));
}

/// Two-outcome measurement {E_+, 1 - E_+} with E_+ the positive-part projector of rho - sigma.
inline POVM helstrom_povm(const DensityMatrix& rho, const DensityMatrix& sigma) {
  detail::require_same_dim(rho.dim(), sigma.dim());
  const JordanHahn jh = jordan_hahn(HermitianOperator(rho.matrix() - sigma.matrix()));
  const ComplexMatrix rest = identity(rho.dim()) - jh.projector_positive;
  return POVM({HermitianOperator(jh.projector_positive), HermitianOperator(rest)});
}

struct DiscriminationResult {
  double rate;
  double stderr_;  // binomial standard error of the rate
  std::int64_t trials;
};

namespace detail {

inline std::size_t sample_index(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

inline std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += std::max(0.0, p[i]);
    c[i] = acc;
  }
  return c;
}

}  // namespace detail

/// Alice sends rho or sigma with equal probability; Bob measures `povm` and guesses by maximum
/// likelihood (ties go to rho). Trial t draws from the stream keyed by (seed, t).
inline DiscriminationResult discrimination_game(const DensityMatrix& rho, const DensityMatrix& sigma,
                                                const POVM& povm, std::int64_t trials, std::uint64_t seed) {
  if (trials < 1) throw invalid_parameter("trials must be >= 1");
  const std::vector<double> p = induced_dist(rho, povm).weights();
  const std::vector<double> q = induced_dist(sigma, povm).weights();
  std::vector<bool> guess_rho(p.size());
  for (std::size_t x = 0; x < p.size(); ++x) guess_rho[x] = p[x] >= q[x];
  const std::vector<double> cp = detail::cumulative(p);
  const std::vector<double> cq = detail::cumulative(q);
  std::int64_t wins = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    KeyedRng rng(seed, static_cast<std::uint64_t>(t));
    const bool sent_rho = rng.uniform() < 0.5;
    const std::size_t x = detail::sample_index(sent_rho ? cp : cq, rng.uniform());
    wins += (guess_rho[x] == sent_rho) ? 1 : 0;
  }
  const double rate = static_cast<double>(wins) / static_cast<double>(trials);
  const double se = std::sqrt(std::max(rate * (1.0 - rate), 1.0 / static_cast<double>(trials)) /
                              static_cast<double>(trials));
  return {rate, se, trials};
}

// ---------------------------------------------------------------------------
// continuous models

/// Parametric density p(x|theta) with sampler. Derivative and Fisher quantities are optional;
/// missing f_1/f_2 are obtained by quadrature of the derivative.
struct ContinuousModel {
  std::string name;
  std::function<double(double x, double theta)> density;
  std::function<double(double x, double theta)> derivative;  // d p / d theta; may be empty
  std::function<double(double theta, KeyedRng& rng)> sampler;
  std::optional<double> f1;
  std::optional<double> f2;
  double scale = 1.0;  // width used to map the real line for quadrature

  /// Checks that the density integrates to one at theta.
  void validate(double theta = 0.0) const {
    if (!density || !sampler) throw invalid_input("model needs a density and a sampler");
    const double mass = integrate_real_line([&](double x) { return density(x, theta); }, theta, scale, 1e-10);
    if (std::abs(mass - 1.0) > 1e-6) {
      throw invalid_input("model density integrates to " + std::to_string(mass));
    }
  }
};

inline double model_f1(const ContinuousModel& m, double theta) {
  if (m.f1) return *m.f1;
  if (!m.derivative) throw undefined_quantity("model '" + m.name + "' has no derivative; f_1 not computable");
  return integrate_real_line([&](double x) { return std::abs(m.derivative(x, theta)); }, theta, m.scale, 1e-10);
}

inline double model_f2(const ContinuousModel& m, double theta) {
  if (m.f2) return *m.f2;
  if (!m.derivative) throw undefined_quantity("model '" + m.name + "' has no derivative; f_2 not computable");
  return integrate_real_line(
      [&](double x) {
        const double p = m.density(x, theta);
        if (p <= 0.0) return 0.0;
        const double d = m.derivative(x, theta);
        return d * d / p;
      },
      theta, m.scale, 1e-10);
}

inline ContinuousModel gaussian_model(double sigma) {
  if (!(sigma > 0.0)) throw invalid_parameter("sigma must be positive");
  ContinuousModel m;
  m.name = "gaussian";
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  m.density = [=](double x, double t) {
    const double z = (x - t) / sigma;
    return norm * std::exp(-0.5 * z * z);
  };
  m.derivative = [=](double x, double t) {
    const double z = (x - t) / sigma;
    return norm * std::exp(-0.5 * z * z) * z / sigma;
  };
  m.sampler = [=](double t, KeyedRng& rng) { return t + sigma * rng.normal(); };
  m.f1 = std::sqrt(2.0 / std::numbers::pi) / sigma;
  m.f2 = 1.0 / (sigma * sigma);
  m.scale = sigma;
  m.validate();
  return m;
}

inline ContinuousModel cauchy_model(double gamma) {
  if (!(gamma > 0.0)) throw invalid_parameter("gamma must be positive");
  ContinuousModel m;
  m.name = "cauchy";
  m.density = [=](double x, double t) {
    const double z = x - t;
    return gamma / (std::numbers::pi * (gamma * gamma + z * z));
  };
  m.derivative = [=](double x, double t) {
    const double z = x - t;
    const double den = gamma * gamma + z * z;
    return 2.0 * gamma * z / (std::numbers::pi * den * den);
  };
  m.sampler = [=](double t, KeyedRng& rng) { return t + gamma * std::tan(std::numbers::pi * (rng.uniform() - 0.5)); };
  m.f1 = 2.0 / (std::numbers::pi * gamma);
  m.f2 = 1.0 / (2.0 * gamma * gamma);
  m.scale = gamma;
  m.validate();
  return m;
}

inline ContinuousModel laplace_model(double b) {
  if (!(b > 0.0)) throw invalid_parameter("scale must be positive");
  ContinuousModel m;
  m.name = "laplace";
  m.density = [=](double x, double t) { return std::exp(-std::abs(x - t) / b) / (2.0 * b); };
  m.derivative = [=](double x, double t) {
    const double z = x - t;
    const double s = z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    return s * std::exp(-std::abs(z) / b) / (2.0 * b * b);
  };
  m.sampler = [=](double t, KeyedRng& rng) {
    const double e = -b * std::log(rng.uniform());
    return rng.uniform() < 0.5 ? t - e : t + e;
  };
  m.f1 = 1.0 / b;
  m.f2 = 1.0 / (b * b);
  m.scale = b;
  m.validate();
  return m;
}

/// Exponential with rate 1/lambda shifted so that its median is theta. The support edge moves
/// with theta, so no regular derivative is provided.
inline ContinuousModel skewed_exponential_model(double lambda) {
  if (!(lambda > 0.0)) throw invalid_parameter("lambda must be positive");
  ContinuousModel m;
  m.name = "skewed_exponential";
  const double shift = lambda * std::log(2.0);
  m.density = [=](double x, double t) {
    const double z = x - (t - shift);
    return z < 0.0 ? 0.0 : std::exp(-z / lambda) / lambda;
  };
  m.sampler = [=](double t, KeyedRng& rng) { return t - shift - lambda * std::log(rng.uniform()); };
  m.scale = lambda;
  m.validate();
  return m;
}

using Estimator = std::function<double(std::span<const double>)>;

inline double sample_median(std::span<const double> xs) {
  if (xs.empty()) throw invalid_input("median of an empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double sample_mean(std::span<const double> xs) {
  if (xs.empty()) throw invalid_input("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

namespace detail {

/// Estimator replicas; replica t uses the stream keyed by (seed, t).
inline std::vector<double> replicas(const ContinuousModel& model, const Estimator& est, double theta, int m,
                                    std::int64_t trials, std::uint64_t seed) {
  if (m < 1) throw invalid_parameter("sample size m must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(trials));
  std::vector<double> sample(static_cast<std::size_t>(m));
  for (std::int64_t t = 0; t < trials; ++t) {
    KeyedRng rng(seed, static_cast<std::uint64_t>(t));
    for (double& x : sample) x = model.sampler(theta, rng);
    out[static_cast<std::size_t>(t)] = est(sample);
  }
  return out;
}

struct Moments {
  double mean;
  double var;
  double m4;  // fourth central moment
};

inline Moments moments(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  return {mean, m2 / (n - 1.0), m4 / n};
}

}  // namespace detail

struct MedianReport {
  double fraction;  // share of estimates below theta, ties counted 1/2
  double stderr_;   // binomial standard error under balance
  double z;         // (fraction - 1/2) / stderr
  bool balanced;    // |z| <= 3
  std::int64_t trials;
  int m;
};

inline constexpr std::int64_t min_median_trials = 100;

inline MedianReport median_check(const ContinuousModel& model, const Estimator& est, double theta, std::int64_t trials,
                                 int m, std::uint64_t seed) {
  if (trials < min_median_trials) {
    throw invalid_parameter("median check needs at least " + std::to_string(min_median_trials) +
                            " trials for a 3-sigma decision");
  }
  const std::vector<double> r = detail::replicas(model, est, theta, m, trials, seed);
  double below = 0.0;
  for (double x : r) below += x < theta ? 1.0 : (x == theta ? 0.5 : 0.0);
  const double frac = below / static_cast<double>(trials);
  const double se = std::sqrt(0.25 / static_cast<double>(trials));
  const double z = (frac - 0.5) / se;
  return {frac, se, z, std::abs(z) <= 3.0, trials, m};
}

struct EstimationResult {
  double dispersion;
  double bound;
  double stderr_;
  int m;
  std::int64_t trials;
  bool satisfied;
};

/// Gaussian-kernel density estimate at x with Silverman bandwidth. Returns (density, bandwidth).
inline std::pair<double, double> kde_at(const std::vector<double>& xs, double x) {
  const detail::Moments mo = detail::moments(xs);
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double spread = std::min(std::sqrt(mo.var), iqr / 1.34);
  const auto n = static_cast<double>(xs.size());
  const double h = 0.9 * spread * std::pow(n, -0.2);
  if (!(h > 0.0)) throw undefined_quantity("replicas have zero spread; density at theta undefined");
  double sum = 0.0;
  for (double v : xs) {
    const double z = (x - v) / h;
    sum += std::exp(-0.5 * z * z);
  }
  return {sum / (n * h * std::sqrt(2.0 * std::numbers::pi)), h};
}

/// Sample-median replicas of size m = 2k+1 estimate the median density g at theta; the per-event
/// density follows from g = m!/(k!)^2 4^(-k) p(theta). Reports dispersion 1/(2 p(theta)) against
/// the bound 1/f_1 and asserts dispersion >= bound - 3 stderr.
inline EstimationResult median_dispersion_vs_bound(const ContinuousModel& model, double theta, int m,
                                                   std::int64_t trials, std::uint64_t seed) {
  if (m < 1 || m % 2 == 0) throw invalid_parameter("sample size m must be odd and positive");
  if (trials < min_median_trials) throw invalid_parameter("too few trials for a density estimate");
  const double f1 = model_f1(model, theta);
  const double bound = f1 > 0.0 ? 1.0 / f1 : infinity;
  const std::vector<double> r = detail::replicas(model, sample_median, theta, m, trials, seed);
  const auto [g, h] = kde_at(r, theta);
  const int k = (m - 1) / 2;
  const double log_factor = 2.0 * std::lgamma(k + 1.0) + k * std::log(4.0) - std::lgamma(m + 1.0);
  const double p_theta = g * std::exp(log_factor);
  const double dispersion = 1.0 / (2.0 * p_theta);
  // kernel roughness R(K) = 1/(2 sqrt(pi)) for the Gaussian kernel
  const double rel_se = std::sqrt(1.0 / (2.0 * std::sqrt(std::numbers::pi)) / (static_cast<double>(trials) * h * g));
  const double se = dispersion * rel_se;
  return {dispersion, bound, se, m, trials, dispersion >= bound - 3.0 * se};
}

struct QuantumMedianBound {
  double bound;  // 1/F_1
  POVM povm;     // measurement attaining F_1
};

inline QuantumMedianBound quantum_median_bound(const ParametricFamily& fam, double theta) {
  const double f1 = trace_speed(fam, theta);
  return {f1 > 0.0 ? 1.0 / f1 : infinity, optimal_povm(fam, theta, PovmTarget::trace_speed)};
}

/// 1/f_1 of the distribution induced by `povm` (+inf when f_1 vanishes).
inline double classical_median_bound(const ParametricFamily& fam, double theta, const POVM& povm) {
  const double f1 = gen_fisher(induced_parametric(fam, theta, povm), 1.0);
  return f1 > 0.0 ? 1.0 / f1 : infinity;
}

// ---------------------------------------------------------------------------
// Cramer-Rao

struct CramerRaoReport {
  double variance;
  double bound;          // 1/(m f_2)
  double quantum_bound;  // 1/(m F_2); NaN for classical models
  double stderr_;        // standard error of the variance
  double bias;
  bool biased;
  bool converged;  // block variances agree within a factor 2
  bool asserted;   // bound checked (finite bound, unbiased, converged)
  bool satisfied;  // variance >= bound - 3 stderr when asserted
  int m;
  std::int64_t trials;
};

namespace detail {

inline CramerRaoReport cramer_rao_report(const std::vector<double>& r, double theta, double f2, int m) {
  const auto n = static_cast<double>(r.size());
  const Moments mo = moments(r);
  const double se_var = std::sqrt(std::max(0.0, mo.m4 - mo.var * mo.var) / n);
  const double bias = mo.mean - theta;
  const bool biased = std::abs(bias) > 3.0 * std::sqrt(mo.var / n) + 1e-12;
  double vmin = infinity;
  double vmax = 0.0;
  const std::size_t block = r.size() / 4;
  for (int b = 0; b < 4; ++b) {
    const std::vector<double> part(r.begin() + static_cast<std::ptrdiff_t>(b * block),
                                   r.begin() + static_cast<std::ptrdiff_t>((b + 1) * block));
    const double v = moments(part).var;
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const bool converged = std::isfinite(mo.var) && vmin > 0.0 && vmax / vmin <= 2.0;
  const double bound = f2 > 0.0 ? 1.0 / (m * f2) : infinity;
  const bool asserted = std::isfinite(bound) && !biased && converged;
  const bool satisfied = !asserted || mo.var >= bound - 3.0 * se_var;
  return {mo.var, bound, std::numeric_limits<double>::quiet_NaN(), se_var, bias, biased, converged, asserted,
          satisfied, m, static_cast<std::int64_t>(r.size())};
}

}  // namespace detail

inline constexpr std::int64_t min_cramer_rao_trials = 100;

inline CramerRaoReport cramer_rao_check(const ContinuousModel& model, double theta, const Estimator& est, int m,
                                        std::int64_t trials, std::uint64_t seed) {
  if (trials < min_cramer_rao_trials) throw invalid_parameter("too few trials for a variance check");
  const std::vector<double> r = detail::replicas(model, est, theta, m, trials, seed);
  return detail::cramer_rao_report(r, theta, model_f2(model, theta), m);
}

/// Estimator over outcome indices of a discrete measurement.
using DiscreteEstimator = std::function<double(std::span<const int>)>;

/// theta0 + (1/(m f_2)) sum_i p'_x_i / p_x_i: unbiased at theta0 with variance 1/(m f_2).
inline DiscreteEstimator locally_unbiased_estimator(const ParametricDist& d, double theta0) {
  const double f2 = gen_fisher(d, 2.0);
  if (!(f2 > 0.0) || std::isinf(f2)) throw undefined_quantity("locally unbiased estimator needs 0 < f_2 < inf");
  std::vector<double> score(d.size());
  for (std::size_t x = 0; x < d.size(); ++x) {
    score[x] = d.weights()[x] > p_floor ? d.derivative()[x] / d.weights()[x] : 0.0;
  }
  return [score, f2, theta0](std::span<const int> xs) {
    double s = 0.0;
    for (int x : xs) s += score[static_cast<std::size_t>(x)];
    return theta0 + s / (static_cast<double>(xs.size()) * f2);
  };
}

/// Samples outcomes of `povm` on rho(theta); reports the classical bound 1/(m f_2) and 1/(m F_2).
inline CramerRaoReport cramer_rao_check(const ParametricFamily& fam, double theta, const POVM& povm,
                                        const DiscreteEstimator& est, int m, std::int64_t trials,
                                        std::uint64_t seed) {
  if (m < 1) throw invalid_parameter("sample size m must be >= 1");
  if (trials < min_cramer_rao_trials) throw invalid_parameter("too few trials for a variance check");
  const ParametricDist d = induced_parametric(fam, theta, povm);
  const std::vector<double> c = detail::cumulative(d.weights());
  std::vector<double> r(static_cast<std::size_t>(trials));
  std::vector<int> sample(static_cast<std::size_t>(m));
  for (std::int64_t t = 0; t < trials; ++t) {
    KeyedRng rng(seed, static_cast<std::uint64_t>(t));
    for (int& x : sample) x = static_cast<int>(detail::sample_index(c, rng.uniform()));
    r[static_cast<std::size_t>(t)] = est(sample);
  }
  CramerRaoReport rep = detail::cramer_rao_report(r, theta, gen_fisher(d, 2.0), m);
  const double fq = qfi(fam, theta);
  rep.quantum_bound = fq > 0.0 ? 1.0 / (m * fq) : infinity;
  return rep;
}

}  // namespace qspeed
