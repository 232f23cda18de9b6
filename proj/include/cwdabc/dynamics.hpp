#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

#include "cwdabc/model.hpp"

namespace cwdabc {

/// Latent compartment values. Layout: index 0 = S (susceptible), 1 = I
/// (infected), last = C (cumulative CWD deaths); for indirect models index 2
/// is E, the mass of infectious material in the environment. Fixed capacity
/// 4, so no heap traffic in the step loops.
using StateVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;
using CovMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;

inline constexpr int kS = 0;
inline constexpr int kI = 1;
inline constexpr int kE = 2;  // indirect models only

inline int death_index(int dim) { return dim - 1; }

/// Shared dynamical rates. Direct models read (beta, mu); indirect models
/// read (gamma, mu, epsilon, tau). Unused entries stay 0.
struct DynParams {
  double beta = 0;     // direct transmission, 1/time
  double mu = 0;       // per-capita CWD mortality, 1/time
  double gamma = 0;    // indirect transmission, 1/(mass*time)
  double epsilon = 0;  // per-capita excretion of infectious material, 1/time
  double tau = 0;      // loss of infectious material, 1/time
};

/// Known per-year inputs: additions to the herd and natural mortality.
struct Environment {
  double additions = 0;  // a, animals/time
  double mortality = 0;  // m, 1/time
};

struct Event {
  double rate;
  std::array<int, 3> delta;  // (dS, dI, dC)
};

/// The five direct-transmission jump events.
using EventTable = std::array<Event, 5>;

namespace detail {

inline void check_dim(ProcessKind kind, const StateVector& x) {
  if (x.size() != state_dim(kind))
    throw std::invalid_argument("state dimension does not match process model");
}

// Negative components (possible mid SDE step) are clamped to 0 before any
// rate is formed, so rates and variances stay nonnegative.
inline double nn(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace detail

/// Instantaneous rate of change of the latent state.
///
/// The individual terms (infection, deaths, ...) are written identically
/// here and in ctmc_events, so for the direct model the identity
/// sum_events rate*delta == drift holds exactly in floating point.
inline StateVector drift(ProcessKind kind, const StateVector& x,
                         const DynParams& p, const Environment& env) {
  detail::check_dim(kind, x);
  StateVector f(x.size());
  const double s = detail::nn(x[kS]);
  const double i = detail::nn(x[kI]);
  const double s_death = env.mortality * s;
  const double i_death = env.mortality * i;
  const double cwd_death = p.mu * i;
  if (is_indirect(kind)) {
    const double e = detail::nn(x[kE]);
    const double infection = p.gamma * s * e;
    const double excretion = p.epsilon * i;
    const double loss = p.tau * e;
    f[kS] = env.additions - s_death - infection;
    f[kI] = infection - i_death - cwd_death;
    f[kE] = excretion - loss;
    f[3] = cwd_death;
  } else {
    const double infection = p.beta * s * i;
    f[kS] = env.additions - s_death - infection;
    f[kI] = infection - i_death - cwd_death;
    f[2] = cwd_death;
  }
  return f;
}

/// Diffusion covariance Sigma of the SDE models. Symmetric, nonnegative
/// diagonal; negative state components are clamped to 0 first.
inline CovMatrix diffusion_cov(ProcessKind kind, const StateVector& x,
                               const DynParams& p, const Environment& env) {
  detail::check_dim(kind, x);
  const int n = static_cast<int>(x.size());
  CovMatrix sigma = CovMatrix::Zero(n, n);
  const double s = detail::nn(x[kS]);
  const double i = detail::nn(x[kI]);
  const double s_death = env.mortality * s;
  const double i_death = env.mortality * i;
  const double cwd_death = p.mu * i;
  if (is_indirect(kind)) {
    const double e = detail::nn(x[kE]);
    const double infection = p.gamma * s * e;
    const double excretion = p.epsilon * i;
    const double loss = p.tau * e;
    sigma(0, 0) = env.additions + s_death + infection;
    sigma(0, 1) = sigma(1, 0) = -infection;
    sigma(1, 1) = infection + i_death + cwd_death;
    sigma(1, 3) = sigma(3, 1) = -cwd_death;
    sigma(2, 2) = excretion + loss;
    sigma(3, 3) = cwd_death;
  } else {
    const double infection = p.beta * s * i;
    sigma(0, 0) = env.additions + s_death + infection;
    sigma(0, 1) = sigma(1, 0) = -infection;
    sigma(1, 1) = infection + i_death + cwd_death;
    sigma(1, 2) = sigma(2, 1) = -cwd_death;
    sigma(2, 2) = cwd_death;
  }
  return sigma;
}

/// Jump events of the direct-transmission CTMC:
/// addition, susceptible natural death, infection, infected natural death,
/// CWD death. Indirect models have no CTMC (E is not a count).
inline EventTable ctmc_events(ProcessKind kind, const StateVector& x,
                              const DynParams& p, const Environment& env) {
  if (is_indirect(kind))
    throw UnsupportedModelError(
        "no CTMC for indirect transmission: environmental mass is not a "
        "discrete variable");
  detail::check_dim(kind, x);
  const double s = detail::nn(x[kS]);
  const double i = detail::nn(x[kI]);
  return EventTable{{
      {env.additions, {+1, 0, 0}},
      {env.mortality * s, {-1, 0, 0}},
      {p.beta * s * i, {-1, +1, 0}},
      {env.mortality * i, {0, -1, 0}},
      {p.mu * i, {0, -1, +1}},
  }};
}

}  // namespace cwdabc
