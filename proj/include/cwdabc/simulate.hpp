#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>
#include <vector>

#include "cwdabc/dynamics.hpp"
#include "cwdabc/errors.hpp"
#include "cwdabc/rng.hpp"

namespace cwdabc {

/// Piecewise-constant known inputs: entry k applies on [t0 + k, t0 + k + 1).
/// Times past the table clamp to the last entry.
struct EnvSchedule {
  double t0 = 0;
  std::vector<Environment> per_year;

  static EnvSchedule constant(double additions, double mortality,
                              double t0 = 0) {
    return EnvSchedule{t0, {Environment{additions, mortality}}};
  }

  const Environment& at(double t) const {
    auto k = static_cast<std::ptrdiff_t>(std::floor(t - t0));
    if (k < 0) k = 0;
    const auto last = static_cast<std::ptrdiff_t>(per_year.size()) - 1;
    if (k > last) k = last;
    return per_year[static_cast<std::size_t>(k)];
  }

  /// First time after t at which (a, m) may change.
  double next_change(double t) const {
    return t0 + std::floor(t - t0) + 1.0;
  }
};

/// Observation times plus the internal integrator step. Every observation
/// time must sit on the step lattice; construction enforces it.
struct TimeGrid {
  double t0 = 0;
  std::vector<double> obs_times;
  double step = 1.0 / 12.0;

  TimeGrid(double t0_, std::vector<double> obs, double step_)
      : t0(t0_), obs_times(std::move(obs)), step(step_) {
    if (!(step > 0)) throw std::invalid_argument("step must be positive");
    double prev = t0 - 1.0;
    for (double t : obs_times) {
      if (t < t0) throw std::invalid_argument("observation before t0");
      if (t <= prev)
        throw std::invalid_argument("observation times must be increasing");
      prev = t;
      const double k = (t - t0) / step;
      if (std::fabs(k - std::round(k)) > 1e-9 * std::max(1.0, std::fabs(k)))
        throw std::invalid_argument(
            "observation time is not a multiple of the step");
    }
  }

  std::vector<long> obs_step_indices() const {
    std::vector<long> idx;
    idx.reserve(obs_times.size());
    for (double t : obs_times) idx.push_back(std::lround((t - t0) / step));
    return idx;
  }
};

/// Latent states at the observation times.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

/// Symmetric PSD square root via eigendecomposition: B = V sqrt(L) V^T.
/// Eigenvalues below 1e-12 are treated as 0; below -1e-10 the input is
/// rejected as not PSD.
inline CovMatrix psd_sqrt(const CovMatrix& sigma) {
  const int n = static_cast<int>(sigma.rows());
  if (sigma.cols() != n) throw std::invalid_argument("psd_sqrt: not square");
  const double scale = sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * (1.0 + scale))
    throw std::invalid_argument("psd_sqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<CovMatrix> es(sigma);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psd_sqrt: eigendecomposition failed");
  auto evals = es.eigenvalues();
  for (int i = 0; i < n; ++i) {
    if (evals[i] < -1e-10)
      throw NotPsdError("psd_sqrt: eigenvalue " + std::to_string(evals[i]) +
                            " below PSD tolerance",
                        evals[i]);
    evals[i] = evals[i] < 1e-12 ? 0.0 : std::sqrt(evals[i]);
  }
  CovMatrix b = es.eigenvectors() * evals.asDiagonal() *
                es.eigenvectors().transpose();
  b = ((b + b.transpose()) * 0.5).eval();
  return b;
}

namespace detail {

inline void check_initial_state(const StateVector& x0) {
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    if (!(x0[i] >= 0.0))
      throw std::invalid_argument("initial state must be nonnegative");
}

inline void clamp_nonnegative(StateVector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] < 0.0) x[i] = 0.0;
}

inline void check_finite(const StateVector& x, double t,
                         const char* simulator) {
  if (!x.allFinite())
    throw DivergenceError(std::string(simulator) +
                              ": non-finite state at t=" + std::to_string(t),
                          t);
}

}  // namespace detail

/// Classical fixed-step RK4. The (a, m) pair for a step is looked up at the
/// step midpoint; with steps that divide the year this is unambiguous.
/// States are clamped to >= 0 after every step.
inline Trajectory simulate_ode(ProcessKind kind, const DynParams& p,
                               const StateVector& x0, const TimeGrid& grid,
                               const EnvSchedule& sched) {
  detail::check_initial_state(x0);
  const auto obs_idx = grid.obs_step_indices();
  const double h = grid.step;
  Trajectory traj;
  traj.times = grid.obs_times;
  traj.states.reserve(obs_idx.size());

  StateVector x = x0;
  std::size_t next_obs = 0;
  const long last = obs_idx.empty() ? 0 : obs_idx.back();
  for (long j = 0; j <= last; ++j) {
    while (next_obs < obs_idx.size() && obs_idx[next_obs] == j) {
      traj.states.push_back(x);
      ++next_obs;
    }
    if (j == last) break;
    const double t = grid.t0 + static_cast<double>(j) * h;
    const Environment& env = sched.at(t + 0.5 * h);
    const StateVector k1 = drift(kind, x, p, env);
    const StateVector k2 = drift(kind, x + (0.5 * h) * k1, p, env);
    const StateVector k3 = drift(kind, x + (0.5 * h) * k2, p, env);
    const StateVector k4 = drift(kind, x + h * k3, p, env);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    detail::clamp_nonnegative(x);
    detail::check_finite(x, t + h, "simulate_ode");
  }
  return traj;
}

/// Gillespie direct method for the direct-transmission CTMC.
///
/// Stream consumption per jump: one exponential waiting time, then one
/// uniform for event selection. A waiting time that would cross a year
/// boundary or an observation time only advances the clock to that boundary
/// and is redrawn (rates are piecewise constant, so this is exact). Zero
/// total rate parks the chain until the next boundary.
inline Trajectory simulate_ctmc(const DynParams& p, const StateVector& x0,
                                const TimeGrid& grid, const EnvSchedule& sched,
                                RngStream& rng) {
  detail::check_initial_state(x0);
  if (x0.size() != 3)
    throw std::invalid_argument("simulate_ctmc: direct model state is 3-dim");
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    if (std::fabs(x0[i] - std::round(x0[i])) > 0.0)
      throw std::invalid_argument("simulate_ctmc: state must be integer");

  Trajectory traj;
  traj.times = grid.obs_times;
  traj.states.reserve(grid.obs_times.size());

  StateVector x = x0;
  double t = grid.t0;
  for (double t_obs : grid.obs_times) {
    while (t < t_obs) {
      const Environment& env = sched.at(t);
      double boundary = sched.next_change(t);
      if (boundary > t_obs) boundary = t_obs;
      const EventTable events = ctmc_events(ProcessKind::DirectCtmc, x, p, env);
      double total = 0;
      for (const Event& ev : events) total += ev.rate;
      if (!(total > 0)) {
        t = boundary;
        continue;
      }
      const double wait = rng.exponential(total);
      if (t + wait > boundary) {
        t = boundary;
        continue;
      }
      t += wait;
      double u = rng.uniform() * total;
      for (const Event& ev : events) {
        u -= ev.rate;
        if (u <= 0.0 || &ev == &events.back()) {
          x[kS] += ev.delta[0];
          x[kI] += ev.delta[1];
          x[2] += ev.delta[2];
          break;
        }
      }
      detail::clamp_nonnegative(x);  // rates vanish at 0, so this is a no-op
    }
    traj.states.push_back(x);
  }
  return traj;
}

struct SdeOptions {
  /// Test hook: skip the diffusion term entirely, which reduces the scheme
  /// to plain Euler integration of the drift.
  bool zero_diffusion = false;
};

/// Euler-Maruyama: x <- x + f*dt + B*sqrt(dt)*eta, eta ~ N(0, I), with the
/// Gaussian components drawn in state order. Components are clamped to 0
/// after every step; C is *not* forced monotone (the noise term may
/// legitimately decrement it between steps).
inline Trajectory simulate_sde(ProcessKind kind, const DynParams& p,
                               const StateVector& x0, const TimeGrid& grid,
                               const EnvSchedule& sched, RngStream& rng,
                               const SdeOptions& opts = {}) {
  detail::check_initial_state(x0);
  const auto obs_idx = grid.obs_step_indices();
  const double h = grid.step;
  const double sqrt_h = std::sqrt(h);
  const int dim = static_cast<int>(x0.size());

  Trajectory traj;
  traj.times = grid.obs_times;
  traj.states.reserve(obs_idx.size());

  StateVector x = x0;
  std::size_t next_obs = 0;
  const long last = obs_idx.empty() ? 0 : obs_idx.back();
  for (long j = 0; j <= last; ++j) {
    while (next_obs < obs_idx.size() && obs_idx[next_obs] == j) {
      traj.states.push_back(x);
      ++next_obs;
    }
    if (j == last) break;
    const double t = grid.t0 + static_cast<double>(j) * h;
    const Environment& env = sched.at(t);
    const StateVector f = drift(kind, x, p, env);
    if (!opts.zero_diffusion) {
      const CovMatrix b = psd_sqrt(diffusion_cov(kind, x, p, env));
      StateVector eta(dim);
      for (int c = 0; c < dim; ++c) eta[c] = rng.normal();
      x += h * f + b * (sqrt_h * eta);
    } else {
      x += h * f;
    }
    detail::clamp_nonnegative(x);
    detail::check_finite(x, t + h, "simulate_sde");
  }
  return traj;
}

}  // namespace cwdabc
