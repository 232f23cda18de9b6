#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cwdabc/model.hpp"
#include "cwdabc/rng.hpp"
#include "cwdabc/simulate.hpp"

namespace cwdabc {

/// Observed cumulative CWD deaths at the observation times.
struct ObservedSeries {
  std::vector<double> times;
  std::vector<std::int64_t> counts;
};

/// C~ ~ Binomial(N, C/N) with N = S + I + C. E is a mass, not an animal, so
/// it never enters N. Real-valued latent states are rounded to integers
/// first; an empty herd observes 0.
inline ObservedSeries observe_binomial(const Trajectory& traj, RngStream& rng) {
  ObservedSeries out;
  out.times = traj.times;
  out.counts.reserve(traj.states.size());
  for (const StateVector& x : traj.states) {
    const auto s = std::llround(x[kS]);
    const auto i = std::llround(x[kI]);
    auto c = std::llround(x[x.size() - 1]);
    const auto n = s + i + c;
    if (c > n) c = n;
    if (n <= 0) {
      out.counts.push_back(0);
      continue;
    }
    double prob = static_cast<double>(c) / static_cast<double>(n);
    if (prob < 0.0) prob = 0.0;
    if (prob > 1.0) prob = 1.0;
    out.counts.push_back(rng.binomial(n, prob));
  }
  return out;
}

/// C~ ~ Poisson(C). The draw may exceed the herd size; no cap is applied.
inline ObservedSeries observe_poisson(const Trajectory& traj, RngStream& rng) {
  ObservedSeries out;
  out.times = traj.times;
  out.counts.reserve(traj.states.size());
  for (const StateVector& x : traj.states)
    out.counts.push_back(rng.poisson(x[x.size() - 1]));
  return out;
}

inline ObservedSeries observe(DataKind kind, const Trajectory& traj,
                              RngStream& rng) {
  return kind == DataKind::Binomial ? observe_binomial(traj, rng)
                                    : observe_poisson(traj, rng);
}

}  // namespace cwdabc
