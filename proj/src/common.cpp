#include "refprior/common.hpp"

#include <algorithm>
#include <cmath>

namespace refprior {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0x6a09e667f3bcc909ULL * (stream + 1));
  std::seed_seq seq{splitmix64(state), splitmix64(state), splitmix64(state),
                    splitmix64(state)};
  return Rng(seq);
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return kLogZero;
  const double m = *std::max_element(x.begin(), x.end());
  if (m == kLogZero || !std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - m);
  return m + std::log(acc);
}

std::vector<double> linspace(const Interval& bounds, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = 0.5 * (bounds.lower + bounds.upper);
    return out;
  }
  const double step = bounds.width() / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = bounds.lower + step * static_cast<double>(i);
  if (count > 1) out.back() = bounds.upper;
  return out;
}

std::vector<double> cell_centres(const Interval& bounds, std::size_t count) {
  std::vector<double> out(count);
  const double step = bounds.width() / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = bounds.lower + step * (static_cast<double>(i) + 0.5);
  return out;
}

}  // namespace refprior
