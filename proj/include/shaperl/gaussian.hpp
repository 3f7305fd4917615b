#pragma once

#include <algorithm>
#include <cmath>

#include "shaperl/rng.hpp"

namespace shaperl {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;

// Gaussian policy head: mean plus log standard deviation, with the std
// clamped to [e^-5, e^1] so sampled actions and log-probs stay finite.
struct GaussianPolicyOut {
  double mean = 0.0;
  double log_std = 0.0;

  double std_dev() const { return std::exp(log_std); }
};

inline GaussianPolicyOut make_gaussian_out(double mean_raw, double log_std_raw) {
  return {mean_raw, std::clamp(log_std_raw, kLogStdMin, kLogStdMax)};
}

inline double gaussian_sample(const GaussianPolicyOut& out, RngStream& rng) {
  return out.mean + out.std_dev() * rng.normal();
}

inline double gaussian_log_prob(const GaussianPolicyOut& out, double a) {
  double z = (a - out.mean) / out.std_dev();
  return -0.5 * z * z - out.log_std - 0.5 * std::log(2.0 * 3.141592653589793238463);
}

// d log N / d mean and d log N / d log_std.
struct GaussianScore {
  double d_mean = 0.0;
  double d_log_std = 0.0;
};

inline GaussianScore gaussian_log_prob_grad(const GaussianPolicyOut& out, double a) {
  double sigma = out.std_dev();
  double z = (a - out.mean) / sigma;
  return {z / sigma, z * z - 1.0};
}

inline double gaussian_entropy(const GaussianPolicyOut& out) {
  return 0.5 * std::log(2.0 * 3.141592653589793238463) + 0.5 + out.log_std;
}

}  // namespace shaperl
