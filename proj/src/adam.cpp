#include "refprior/adam.hpp"

#include <cmath>
#include <string>

#include "refprior/common.hpp"

namespace refprior {

AdamStep adam_step(const AdamState& state, std::span<const double> grad) {
  if (grad.size() != state.m.size() || grad.size() != state.v.size())
    throw ArgumentError("gradient size " + std::to_string(grad.size()) +
                        " does not match optimizer state " + std::to_string(state.m.size()));
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i]))
      throw NumericError("non-finite gradient at index " + std::to_string(i));

  AdamStep out{std::vector<double>(grad.size()), state};
  auto& s = out.state;
  s.t += 1;
  const double t = static_cast<double>(s.t);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    out.delta[i] = -s.lr * m_hat / (std::sqrt(v_hat) + s.epsilon);
  }
  return out;
}

void adam_apply(AdamState& state, std::span<const double> grad, std::span<double> params) {
  if (params.size() != grad.size()) throw ArgumentError("parameter/gradient size mismatch");
  auto step = adam_step(state, grad);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] += step.delta[i];
  state = std::move(step.state);
}

nlohmann::json to_json(const AdamState& s) {
  return {{"m", s.m},         {"v", s.v},       {"t", s.t},  {"beta1", s.beta1},
          {"beta2", s.beta2}, {"epsilon", s.epsilon}, {"lr", s.lr}};
}

AdamState adam_from_json(const nlohmann::json& j) {
  AdamState s;
  s.m = j.at("m").get<std::vector<double>>();
  s.v = j.at("v").get<std::vector<double>>();
  s.t = j.at("t").get<std::uint64_t>();
  s.beta1 = j.at("beta1").get<double>();
  s.beta2 = j.at("beta2").get<double>();
  s.epsilon = j.at("epsilon").get<double>();
  s.lr = j.at("lr").get<double>();
  if (s.m.size() != s.v.size()) throw ConfigError("optimizer moments differ in length");
  return s;
}

}  // namespace refprior
