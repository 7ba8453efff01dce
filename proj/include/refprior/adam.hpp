#pragma once

#include <span>
#include <vector>

#include <json.hpp>

namespace refprior {

/// AdaM moments and settings. The optimizer always minimizes; callers that
/// ascend an objective pass the negated gradient.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lr = 1e-3;

  static AdamState fresh(std::size_t n, double lr) {
    AdamState s;
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
    s.lr = lr;
    return s;
  }
};

struct AdamStep {
  std::vector<double> delta;
  AdamState state;
};

/// One bias-corrected AdaM update. Throws NumericError naming the first
/// non-finite gradient entry.
AdamStep adam_step(const AdamState& state, std::span<const double> grad);

/// In-place variant used by the training loops: applies the step to params.
void adam_apply(AdamState& state, std::span<const double> grad, std::span<double> params);

nlohmann::json to_json(const AdamState& s);
AdamState adam_from_json(const nlohmann::json& j);

}  // namespace refprior
