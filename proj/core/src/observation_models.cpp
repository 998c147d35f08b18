#include "secretballot/observation_models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "secretballot/numeric.hpp"

namespace secretballot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_hypothesis(int hypothesis) {
  if (hypothesis != 0 && hypothesis != 1) {
    throw std::invalid_argument("hypothesis must be 0 or 1, got " +
                                std::to_string(hypothesis));
  }
}

void check_finite(const char* name, double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

}  // namespace

LikelihoodModel::LikelihoodModel(ModelFamily family, double a, double b, double c)
    : family_(family), a_(a), b_(b), c_(c) {
  if (family_ == ModelFamily::gaussian_shift) {
    const double var = c_ * c_;
    log_lr_slope_ = (b_ - a_) / var;
    log_lr_offset_ = -(b_ * b_ - a_ * a_) / (2.0 * var);
  } else {
    log_lr_slope_ = 1.0 / a_ - 1.0 / b_;
    log_lr_offset_ = std::log(a_ / b_);
  }
}

LikelihoodModel LikelihoodModel::gaussian_shift(double mean0, double mean1,
                                                double stddev) {
  check_finite("mean0", mean0);
  check_finite("mean1", mean1);
  check_finite("stddev", stddev);
  if (stddev <= 0.0) {
    throw std::invalid_argument("stddev must be positive");
  }
  if (!(mean1 > mean0)) {
    throw std::invalid_argument("mean1 must exceed mean0");
  }
  return LikelihoodModel(ModelFamily::gaussian_shift, mean0, mean1, stddev);
}

LikelihoodModel LikelihoodModel::exponential_scale(double scale0, double scale1) {
  check_finite("scale0", scale0);
  check_finite("scale1", scale1);
  if (scale0 <= 0.0) {
    throw std::invalid_argument("scale0 must be positive");
  }
  if (!(scale1 > scale0)) {
    throw std::invalid_argument("scale1 must exceed scale0");
  }
  return LikelihoodModel(ModelFamily::exponential_scale, scale0, scale1, 0.0);
}

double LikelihoodModel::density(int hypothesis, double y) const {
  check_hypothesis(hypothesis);
  if (family_ == ModelFamily::gaussian_shift) {
    const double mean = hypothesis == 0 ? a_ : b_;
    const double z = (y - mean) / c_;
    return std::exp(-0.5 * z * z) /
           (c_ * std::sqrt(2.0 * std::numbers::pi_v<double>));
  }
  if (y < 0.0) {
    throw std::domain_error("exponential_scale observations are nonnegative");
  }
  const double scale = hypothesis == 0 ? a_ : b_;
  return std::exp(-y / scale) / scale;
}

double LikelihoodModel::likelihood_ratio(double y) const {
  if (family_ == ModelFamily::exponential_scale && y < 0.0) {
    throw std::domain_error("exponential_scale observations are nonnegative");
  }
  return std::exp(log_lr_slope_ * y + log_lr_offset_);
}

double LikelihoodModel::cdf(int hypothesis, double t) const {
  check_hypothesis(hypothesis);
  if (family_ == ModelFamily::gaussian_shift) {
    const double mean = hypothesis == 0 ? a_ : b_;
    return standard_normal_cdf((t - mean) / c_);
  }
  if (t <= 0.0) return 0.0;
  const double scale = hypothesis == 0 ? a_ : b_;
  return -std::expm1(-t / scale);
}

double LikelihoodModel::quantile(int hypothesis, double p) const {
  check_hypothesis(hypothesis);
  if (family_ == ModelFamily::gaussian_shift) {
    const double mean = hypothesis == 0 ? a_ : b_;
    return mean + c_ * inverse_normal_cdf(p);
  }
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return kInf;
  const double scale = hypothesis == 0 ? a_ : b_;
  return -scale * std::log1p(-p);
}

ErrorPair LikelihoodModel::error_probs(double threshold) const {
  if (std::isnan(threshold)) {
    throw std::invalid_argument("vote threshold must not be NaN");
  }
  if (threshold == -kInf) return {1.0, 0.0};
  if (threshold == kInf) return {0.0, 1.0};
  ErrorPair pair;
  if (family_ == ModelFamily::gaussian_shift) {
    pair.false_alarm = standard_normal_tail((threshold - a_) / c_);
    pair.missed_detection = standard_normal_cdf((threshold - b_) / c_);
    return pair;
  }
  if (threshold <= 0.0) return {1.0, 0.0};
  pair.false_alarm = std::exp(-threshold / a_);
  pair.missed_detection = -std::expm1(-threshold / b_);
  return pair;
}

double LikelihoodModel::likelihood_ratio_inverse(double ratio) const {
  if (std::isnan(ratio) || ratio < 0.0) {
    throw std::invalid_argument("likelihood ratio must be nonnegative");
  }
  if (ratio == 0.0) return -kInf;
  if (ratio == kInf) return kInf;
  const double y = (std::log(ratio) - log_lr_offset_) / log_lr_slope_;
  if (family_ == ModelFamily::exponential_scale && y <= 0.0) {
    // The ratio sits at or below likelihood_ratio(0): no observation is ever
    // that unconvincing, so a vote-1 region {LR > ratio} is the whole support.
    return -kInf;
  }
  return y;
}

double LikelihoodModel::support_lower_bound() const {
  return family_ == ModelFamily::gaussian_shift ? -kInf : 0.0;
}

void LikelihoodModel::require(ModelFamily family, const char* accessor) const {
  if (family_ != family) {
    throw std::logic_error(std::string(accessor) +
                           " is not defined for this model family");
  }
}

double LikelihoodModel::mean0() const {
  require(ModelFamily::gaussian_shift, "mean0");
  return a_;
}

double LikelihoodModel::mean1() const {
  require(ModelFamily::gaussian_shift, "mean1");
  return b_;
}

double LikelihoodModel::stddev() const {
  require(ModelFamily::gaussian_shift, "stddev");
  return c_;
}

double LikelihoodModel::scale0() const {
  require(ModelFamily::exponential_scale, "scale0");
  return a_;
}

double LikelihoodModel::scale1() const {
  require(ModelFamily::exponential_scale, "scale1");
  return b_;
}

}  // namespace secretballot
