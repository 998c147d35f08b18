#pragma once

#include <concepts>
#include <string>

// Observation families for a binary detection problem. Each agent sees one
// scalar draw Y whose distribution depends on the true hypothesis H in {0, 1}
// and votes 1 exactly when Y exceeds a threshold (ties vote 0). Both families
// shipped here have a likelihood ratio that is increasing in Y, so threshold
// votes are likelihood-ratio votes.

namespace secretballot {

enum class ModelFamily { gaussian_shift, exponential_scale };

/// The two per-agent error probabilities induced by a vote threshold.
struct ErrorPair {
  double false_alarm = 0.0;        // P{vote 1 | H = 0}
  double missed_detection = 0.0;   // P{vote 0 | H = 1}
};

/// A two-hypothesis scalar observation model with monotone likelihood ratio.
///
/// gaussian_shift:     Y | H=h  ~  Normal(mean_h, stddev^2), mean1 > mean0.
/// exponential_scale:  Y | H=h  ~  Exponential with mean scale_h on [0, inf),
///                     scale1 > scale0.
///
/// Thresholds may be +-infinity: -inf votes 1 always, +inf votes 0 always.
class LikelihoodModel {
 public:
  /// Throws std::invalid_argument unless stddev > 0 and mean1 > mean0.
  static LikelihoodModel gaussian_shift(double mean0, double mean1, double stddev);

  /// Throws std::invalid_argument unless scale1 > scale0 > 0.
  static LikelihoodModel exponential_scale(double scale0, double scale1);

  ModelFamily family() const { return family_; }

  /// Density of Y at y under hypothesis h in {0, 1}. Throws std::domain_error
  /// for y outside the support (negative y, exponential family).
  double density(int hypothesis, double y) const;

  /// f(y | H=1) / f(y | H=0) on the support; increasing in y.
  double likelihood_ratio(double y) const;

  /// P{Y <= t | H = hypothesis}.
  double cdf(int hypothesis, double t) const;

  /// Inverse cdf; maps p in (0, 1) into the support, p<=0 / p>=1 to the
  /// support endpoints (+-inf where unbounded).
  double quantile(int hypothesis, double p) const;

  /// Error probabilities of the vote "1 iff Y > threshold". Accepts the
  /// +-infinity sentinels: -inf gives (1, 0), +inf gives (0, 1).
  ErrorPair error_probs(double threshold) const;

  /// The y with likelihood_ratio(y) == ratio. Ratios at or below the infimum
  /// of the range map to -inf (every point of the support already exceeds
  /// them); ratios of +inf map to +inf.
  double likelihood_ratio_inverse(double ratio) const;

  /// Smallest observable value (-inf for gaussian_shift, 0 for
  /// exponential_scale).
  double support_lower_bound() const;

  // Parameter accessors; each throws std::logic_error when asked of the
  // wrong family.
  double mean0() const;
  double mean1() const;
  double stddev() const;
  double scale0() const;
  double scale1() const;

 private:
  LikelihoodModel(ModelFamily family, double a, double b, double c);
  void require(ModelFamily family, const char* accessor) const;

  ModelFamily family_;
  double a_ = 0.0;  // gaussian: mean0;  exponential: scale0
  double b_ = 0.0;  // gaussian: mean1;  exponential: scale1
  double c_ = 0.0;  // gaussian: stddev; exponential: unused
  // log likelihood_ratio(y) = log_lr_slope_ * y + log_lr_offset_ on the
  // support, with log_lr_slope_ > 0 for both families.
  double log_lr_slope_ = 0.0;
  double log_lr_offset_ = 0.0;
};

/// Anything that quacks like a two-hypothesis scalar observation model.
template <typename M>
concept signal_model = requires(const M& model, int hypothesis, double value) {
  { model.density(hypothesis, value) } -> std::convertible_to<double>;
  { model.likelihood_ratio(value) } -> std::convertible_to<double>;
  { model.cdf(hypothesis, value) } -> std::convertible_to<double>;
  { model.quantile(hypothesis, value) } -> std::convertible_to<double>;
  { model.error_probs(value) } -> std::convertible_to<ErrorPair>;
};

static_assert(signal_model<LikelihoodModel>);

}  // namespace secretballot
