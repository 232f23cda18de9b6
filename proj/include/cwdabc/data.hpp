#pragma once

#include <cstdint>
#include <vector>

#include "cwdabc/observe.hpp"
#include "cwdabc/simulate.hpp"

namespace cwdabc {

/// One epidemic: observation years, the known per-year (a, m) inputs, and
/// the observed cumulative CWD deaths. First observation is the epidemic
/// start with zero deaths.
struct Epidemic {
  std::vector<double> times;              // absolute years, increasing
  std::vector<Environment> env_per_year;  // entry k covers [t0+k, t0+k+1)
  std::vector<std::int64_t> observed;

  double t0() const { return times.front(); }

  EnvSchedule schedule() const { return EnvSchedule{t0(), env_per_year}; }

  TimeGrid grid(double step) const { return TimeGrid(t0(), times, step); }

  ObservedSeries series() const { return ObservedSeries{times, observed}; }
};

/// The full dataset: both epidemics of the study (any count >= 1 works).
struct EpidemicData {
  std::vector<Epidemic> epidemics;

  std::size_t total_obs() const {
    std::size_t n = 0;
    for (const Epidemic& e : epidemics) n += e.times.size();
    return n;
  }

  std::vector<ObservedSeries> observed_series() const {
    std::vector<ObservedSeries> out;
    out.reserve(epidemics.size());
    for (const Epidemic& e : epidemics) out.push_back(e.series());
    return out;
  }
};

}  // namespace cwdabc
