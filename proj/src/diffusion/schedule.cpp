#include "doclayout/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace doclayout::diffusion {

ScheduleKind parse_schedule_kind(std::string_view text) {
  if (text == "sqrt") return ScheduleKind::kSqrt;
  if (text == "linear") return ScheduleKind::kLinear;
  throw ValidationError("unknown noise schedule '" + std::string(text) + "'");
}

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kSqrt ? "sqrt" : "linear";
}

NoiseSchedule NoiseSchedule::make(ScheduleKind kind, int steps, double sqrt_offset) {
  if (steps < 1) throw ValidationError("diffusion step count must be >= 1");
  std::vector<double> betas(steps + 1, 0.0);
  constexpr double kMaxBeta = 0.999;
  if (kind == ScheduleKind::kSqrt) {
    auto ab = [&](double tau) { return 1.0 - std::sqrt(tau + sqrt_offset); };
    for (int t = 1; t <= steps; ++t) {
      const double prev = ab(static_cast<double>(t - 1) / steps);
      const double next = ab(static_cast<double>(t) / steps);
      betas[t] = std::min(1.0 - next / prev, kMaxBeta);
    }
  } else {
    const double scale = 1000.0 / steps;
    const double lo = scale * 1e-4;
    const double hi = std::min(scale * 0.02, kMaxBeta);
    for (int t = 1; t <= steps; ++t) {
      betas[t] = steps == 1 ? hi : lo + (hi - lo) * (t - 1) / (steps - 1);
    }
  }
  NoiseSchedule s = from_betas(std::move(betas));
  s.kind_ = kind;
  return s;
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
  if (betas.size() < 2) throw ValidationError("schedule needs at least one step");
  NoiseSchedule s;
  s.steps_ = static_cast<int>(betas.size()) - 1;
  s.beta_ = std::move(betas);
  s.beta_[0] = 0.0;
  s.alpha_bar_.assign(s.steps_ + 1, 1.0);
  for (int t = 1; t <= s.steps_; ++t) {
    const double b = s.beta_[t];
    if (!(b > 0.0 && b < 1.0)) {
      throw ValidationError("beta[" + std::to_string(t) + "] must lie in (0, 1)");
    }
    s.alpha_bar_[t] = s.alpha_bar_[t - 1] * (1.0 - b);
  }
  return s;
}

NoiseSchedule::Posterior NoiseSchedule::posterior(int t) const {
  check(t);
  const double ab = alpha_bar_[t];
  const double ab_prev = alpha_bar_[t - 1];
  const double b = beta_[t];
  Posterior p;
  p.coef_x0 = std::sqrt(ab_prev) * b / (1.0 - ab);
  p.coef_xt = std::sqrt(1.0 - b) * (1.0 - ab_prev) / (1.0 - ab);
  p.variance = b * (1.0 - ab_prev) / (1.0 - ab);
  return p;
}

}  // namespace doclayout::diffusion
