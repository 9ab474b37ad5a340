#pragma once

#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "doclayout/error.hpp"

namespace doclayout::diffusion {

enum class ScheduleKind {
  kSqrt,    // alpha_bar(tau) = 1 - sqrt(tau + s0), the embedding-diffusion default
  kLinear,  // DDPM linear betas, rescaled to T
};

ScheduleKind parse_schedule_kind(std::string_view text);
std::string_view to_string(ScheduleKind kind);

// Per-step tables for t in [1, T]; index 0 holds alpha_bar = 1 (no noise).
class NoiseSchedule {
 public:
  static NoiseSchedule make(ScheduleKind kind, int steps, double sqrt_offset = 1e-4);
  // Arbitrary betas (index 0 ignored); used by tests to build small chains.
  static NoiseSchedule from_betas(std::vector<double> betas);

  int steps() const noexcept { return steps_; }
  ScheduleKind kind() const noexcept { return kind_; }
  double beta(int t) const { return beta_.at(check(t)); }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const { return alpha_bar_.at(t); }

  // Coefficients of q(x_{t-1} | x_t, x_0): mean = c0 * x_0 + ct * x_t.
  struct Posterior {
    double coef_x0 = 0.0;
    double coef_xt = 0.0;
    double variance = 0.0;  // beta_tilde_t
  };
  Posterior posterior(int t) const;

 private:
  int check(int t) const {
    if (t < 1 || t > steps_) {
      throw ValidationError("diffusion step " + std::to_string(t) + " outside [1, " +
                            std::to_string(steps_) + "]");
    }
    return t;
  }

  ScheduleKind kind_ = ScheduleKind::kSqrt;
  int steps_ = 0;
  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

// Closed-form forward marginal: sqrt(ab_t) x0 + sqrt(1 - ab_t) eps.
template <typename Derived, typename Rng>
auto q_sample(const Eigen::MatrixBase<Derived>& x0, int t, const NoiseSchedule& schedule,
              Rng& rng) {
  using Scalar = typename Derived::Scalar;
  if (t < 1 || t > schedule.steps()) throw ValidationError("q_sample: step out of range");
  std::normal_distribution<Scalar> normal(0, 1);
  const Scalar a = static_cast<Scalar>(std::sqrt(schedule.alpha_bar(t)));
  const Scalar s = static_cast<Scalar>(std::sqrt(1.0 - schedule.alpha_bar(t)));
  typename Derived::PlainObject out = x0;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = a * out.data()[i] + s * normal(rng);
  return out;
}

// One forward transition x_{t-1} -> x_t.
template <typename Derived, typename Rng>
auto q_step(const Eigen::MatrixBase<Derived>& x_prev, int t, const NoiseSchedule& schedule,
            Rng& rng) {
  using Scalar = typename Derived::Scalar;
  std::normal_distribution<Scalar> normal(0, 1);
  const Scalar a = static_cast<Scalar>(std::sqrt(schedule.alpha(t)));
  const Scalar s = static_cast<Scalar>(std::sqrt(schedule.beta(t)));
  typename Derived::PlainObject out = x_prev;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = a * out.data()[i] + s * normal(rng);
  return out;
}

// Mean of q(x_{t-1} | x_t, x_0) for 2 <= t <= T.
template <typename DerivedT, typename Derived0>
auto posterior_mean(const Eigen::MatrixBase<DerivedT>& x_t, const Eigen::MatrixBase<Derived0>& x0,
                    int t, const NoiseSchedule& schedule) {
  using Scalar = typename DerivedT::Scalar;
  if (t < 2 || t > schedule.steps()) throw ValidationError("posterior_mean: step out of range");
  const auto p = schedule.posterior(t);
  typename DerivedT::PlainObject out =
      static_cast<Scalar>(p.coef_x0) * x0 + static_cast<Scalar>(p.coef_xt) * x_t;
  return out;
}

}  // namespace doclayout::diffusion
