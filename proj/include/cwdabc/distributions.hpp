#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cwdabc/dynamics.hpp"
#include "cwdabc/model.hpp"
#include "cwdabc/rng.hpp"

namespace cwdabc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class DistKind { Beta, Gamma, Uniform, DiscreteUniform };

/// One marginal prior. Gamma is shape-rate (Gamma(0.1, 0.1) has mean 1).
struct Marginal {
  DistKind kind = DistKind::Uniform;
  double a = 0;
  double b = 1;

  static Marginal beta_dist(double a, double b) {
    return {DistKind::Beta, a, b};
  }
  static Marginal gamma_dist(double shape, double rate) {
    return {DistKind::Gamma, shape, rate};
  }
  static Marginal uniform(double lo, double hi) {
    return {DistKind::Uniform, lo, hi};
  }
  static Marginal discrete_uniform(double lo, double hi) {
    return {DistKind::DiscreteUniform, lo, hi};
  }

  double sample(RngStream& rng) const {
    switch (kind) {
      case DistKind::Beta: return rng.beta(a, b);
      case DistKind::Gamma: return rng.gamma(a, b);
      case DistKind::Uniform: return rng.uniform(a, b);
      case DistKind::DiscreteUniform:
        return static_cast<double>(rng.uniform_int(
            static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)));
    }
    return 0;
  }

  /// Log density (log mass for the discrete case); -inf outside the support.
  double log_density(double x) const {
    switch (kind) {
      case DistKind::Beta:
        if (x <= 0.0 || x >= 1.0) return kNegInf;
        return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
               (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
      case DistKind::Gamma:
        if (x <= 0.0) return kNegInf;
        return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) -
               b * x;
      case DistKind::Uniform:
        return (x >= a && x <= b) ? -std::log(b - a) : kNegInf;
      case DistKind::DiscreteUniform: {
        if (std::fabs(x - std::round(x)) > 1e-9) return kNegInf;
        return (x >= a - 0.5 && x <= b + 0.5) ? -std::log(b - a + 1.0)
                                              : kNegInf;
      }
    }
    return kNegInf;
  }

  double density(double x) const {
    const double l = log_density(x);
    return l == kNegInf ? 0.0 : std::exp(l);
  }
};

/// Marginal priors for the rates and the per-epidemic initial conditions.
/// The same initial-condition priors apply independently to each epidemic.
struct PriorSpec {
  std::string name = "custom";
  Marginal beta = Marginal::uniform(0, 1);
  Marginal mu = Marginal::uniform(0, 1);
  Marginal gamma = Marginal::uniform(0, 20);
  Marginal epsilon = Marginal::uniform(0, 1);
  Marginal tau = Marginal::uniform(0, 20);
  Marginal s0 = Marginal::discrete_uniform(10, 50);
  Marginal i0 = Marginal::discrete_uniform(0, 20);
  Marginal e0 = Marginal::uniform(0, 6);

  static PriorSpec informative1() {
    PriorSpec p;
    p.name = "informative1";
    p.beta = Marginal::beta_dist(2, 10);
    p.mu = Marginal::beta_dist(2, 5);
    p.gamma = Marginal::gamma_dist(0.01, 0.01);
    p.epsilon = Marginal::beta_dist(2, 2);
    p.tau = Marginal::gamma_dist(0.01, 0.01);
    return p;
  }

  static PriorSpec informative2() {
    PriorSpec p;
    p.name = "informative2";
    return p;  // the flat-uniform set *is* the default layout above
  }

  static PriorSpec noninformative() {
    PriorSpec p;
    p.name = "noninformative";
    p.beta = Marginal::gamma_dist(0.1, 0.1);
    p.mu = Marginal::gamma_dist(0.1, 0.1);
    p.gamma = Marginal::gamma_dist(0.1, 0.1);
    p.epsilon = Marginal::gamma_dist(0.1, 0.1);
    p.tau = Marginal::gamma_dist(0.1, 0.1);
    return p;
  }

  static PriorSpec preset(const std::string& name) {
    if (name == "informative1") return informative1();
    if (name == "informative2") return informative2();
    if (name == "noninformative") return noninformative();
    throw ValidationError("unknown prior preset: " + name);
  }
};

/// Random-walk kernel widths. Continuous parameters move by N(0, sd^2);
/// integer initial conditions by discrete uniform increments, E(0) by a
/// continuous uniform increment.
struct ProposalSpec {
  double beta_sd = 0.02;
  double mu_sd = 0.2;
  double gamma_sd = 0.2;
  double epsilon_sd = 0.2;
  double tau_sd = 2.0;  // variance 4
  std::int64_t s0_halfwidth = 8;
  std::int64_t i0_halfwidth = 3;
  double e0_halfwidth = 1.0;
};

/// Per-epidemic unknown initial conditions; e0 is meaningful only for
/// indirect models.
struct InitialConditions {
  std::int64_t s0 = 0;
  std::int64_t i0 = 0;
  double e0 = 0;

  friend bool operator==(const InitialConditions&,
                         const InitialConditions&) = default;
};

/// A full sampled parameter point: rates shared across epidemics plus one
/// set of initial conditions per epidemic. Components a model does not use
/// are never drawn and stay 0.
struct ParamVector {
  DynParams dyn;
  std::vector<InitialConditions> ics;
};

inline bool operator==(const DynParams& a, const DynParams& b) {
  return a.beta == b.beta && a.mu == b.mu && a.gamma == b.gamma &&
         a.epsilon == b.epsilon && a.tau == b.tau;
}

inline bool operator==(const ParamVector& a, const ParamVector& b) {
  return a.dyn == b.dyn && a.ics == b.ics;
}

/// Name + continuity tag for each component a model actually uses, in draw
/// order. Drives CSV columns and the posterior summaries.
struct ParamInfo {
  std::string name;
  bool discrete;
};

inline std::vector<ParamInfo> param_info(const ModelSpec& m, int n_epidemics) {
  std::vector<ParamInfo> out;
  if (is_indirect(m.process)) {
    out.push_back({"gamma", false});
    out.push_back({"mu", false});
    out.push_back({"epsilon", false});
    out.push_back({"tau", false});
  } else {
    out.push_back({"beta", false});
    out.push_back({"mu", false});
  }
  for (int e = 1; e <= n_epidemics; ++e) {
    const std::string suffix = "_" + std::to_string(e);
    out.push_back({"S0" + suffix, true});
    out.push_back({"I0" + suffix, true});
    if (is_indirect(m.process)) out.push_back({"E0" + suffix, false});
  }
  return out;
}

inline std::vector<double> param_values(const ParamVector& theta,
                                        const ModelSpec& m) {
  std::vector<double> out;
  if (is_indirect(m.process)) {
    out.insert(out.end(), {theta.dyn.gamma, theta.dyn.mu, theta.dyn.epsilon,
                           theta.dyn.tau});
  } else {
    out.insert(out.end(), {theta.dyn.beta, theta.dyn.mu});
  }
  for (const InitialConditions& ic : theta.ics) {
    out.push_back(static_cast<double>(ic.s0));
    out.push_back(static_cast<double>(ic.i0));
    if (is_indirect(m.process)) out.push_back(ic.e0);
  }
  return out;
}

/// Independent draws from the prior for every component the model uses.
/// Draw order: rates in canonical order, then per epidemic S0, I0[, E0].
inline ParamVector prior_sample(const PriorSpec& spec, const ModelSpec& m,
                                int n_epidemics, RngStream& rng) {
  ParamVector theta;
  if (is_indirect(m.process)) {
    theta.dyn.gamma = spec.gamma.sample(rng);
    theta.dyn.mu = spec.mu.sample(rng);
    theta.dyn.epsilon = spec.epsilon.sample(rng);
    theta.dyn.tau = spec.tau.sample(rng);
  } else {
    theta.dyn.beta = spec.beta.sample(rng);
    theta.dyn.mu = spec.mu.sample(rng);
  }
  theta.ics.resize(n_epidemics);
  for (InitialConditions& ic : theta.ics) {
    ic.s0 = static_cast<std::int64_t>(spec.s0.sample(rng));
    ic.i0 = static_cast<std::int64_t>(spec.i0.sample(rng));
    if (is_indirect(m.process)) ic.e0 = spec.e0.sample(rng);
  }
  return theta;
}

inline double log_prior_density(const PriorSpec& spec, const ModelSpec& m,
                                const ParamVector& theta) {
  double lp = 0;
  if (is_indirect(m.process)) {
    lp += spec.gamma.log_density(theta.dyn.gamma);
    lp += spec.mu.log_density(theta.dyn.mu);
    lp += spec.epsilon.log_density(theta.dyn.epsilon);
    lp += spec.tau.log_density(theta.dyn.tau);
  } else {
    lp += spec.beta.log_density(theta.dyn.beta);
    lp += spec.mu.log_density(theta.dyn.mu);
  }
  for (const InitialConditions& ic : theta.ics) {
    lp += spec.s0.log_density(static_cast<double>(ic.s0));
    lp += spec.i0.log_density(static_cast<double>(ic.i0));
    if (is_indirect(m.process)) lp += spec.e0.log_density(ic.e0);
  }
  return lp;
}

inline double prior_density(const PriorSpec& spec, const ModelSpec& m,
                            const ParamVector& theta) {
  const double lp = log_prior_density(spec, m, theta);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

/// Random-walk perturbation; integer components stay integer.
inline ParamVector proposal_sample(const ProposalSpec& spec,
                                   const ModelSpec& m,
                                   const ParamVector& from, RngStream& rng) {
  ParamVector theta = from;
  if (is_indirect(m.process)) {
    theta.dyn.gamma = rng.normal(from.dyn.gamma, spec.gamma_sd);
    theta.dyn.mu = rng.normal(from.dyn.mu, spec.mu_sd);
    theta.dyn.epsilon = rng.normal(from.dyn.epsilon, spec.epsilon_sd);
    theta.dyn.tau = rng.normal(from.dyn.tau, spec.tau_sd);
  } else {
    theta.dyn.beta = rng.normal(from.dyn.beta, spec.beta_sd);
    theta.dyn.mu = rng.normal(from.dyn.mu, spec.mu_sd);
  }
  for (InitialConditions& ic : theta.ics) {
    ic.s0 += rng.uniform_int(-spec.s0_halfwidth, spec.s0_halfwidth);
    ic.i0 += rng.uniform_int(-spec.i0_halfwidth, spec.i0_halfwidth);
    if (is_indirect(m.process))
      ic.e0 += rng.uniform(-spec.e0_halfwidth, spec.e0_halfwidth);
  }
  return theta;
}

namespace detail {

inline double log_normal_increment(double delta, double sd) {
  if (sd <= 0.0) return delta == 0.0 ? 0.0 : kNegInf;  // point-mass kernel
  const double z = delta / sd;
  return -0.5 * z * z - std::log(sd) - 0.91893853320467274178;  // ln sqrt(2pi)
}

inline double log_discrete_increment(std::int64_t delta,
                                     std::int64_t halfwidth) {
  if (delta < -halfwidth || delta > halfwidth) return kNegInf;
  return -std::log(2.0 * static_cast<double>(halfwidth) + 1.0);
}

inline double log_uniform_increment(double delta, double halfwidth) {
  if (halfwidth <= 0.0) return delta == 0.0 ? 0.0 : kNegInf;
  if (delta < -halfwidth || delta > halfwidth) return kNegInf;
  return -std::log(2.0 * halfwidth);
}

}  // namespace detail

/// q_t(to | from): product of the per-component increment kernels.
/// Symmetric in (to, from) since every kernel is a centered random walk.
inline double log_proposal_density(const ProposalSpec& spec,
                                   const ModelSpec& m, const ParamVector& to,
                                   const ParamVector& from) {
  double lq = 0;
  if (is_indirect(m.process)) {
    lq += detail::log_normal_increment(to.dyn.gamma - from.dyn.gamma,
                                       spec.gamma_sd);
    lq += detail::log_normal_increment(to.dyn.mu - from.dyn.mu, spec.mu_sd);
    lq += detail::log_normal_increment(to.dyn.epsilon - from.dyn.epsilon,
                                       spec.epsilon_sd);
    lq += detail::log_normal_increment(to.dyn.tau - from.dyn.tau, spec.tau_sd);
  } else {
    lq += detail::log_normal_increment(to.dyn.beta - from.dyn.beta,
                                       spec.beta_sd);
    lq += detail::log_normal_increment(to.dyn.mu - from.dyn.mu, spec.mu_sd);
  }
  for (std::size_t e = 0; e < to.ics.size(); ++e) {
    lq += detail::log_discrete_increment(to.ics[e].s0 - from.ics[e].s0,
                                         spec.s0_halfwidth);
    lq += detail::log_discrete_increment(to.ics[e].i0 - from.ics[e].i0,
                                         spec.i0_halfwidth);
    if (is_indirect(m.process))
      lq += detail::log_uniform_increment(to.ics[e].e0 - from.ics[e].e0,
                                          spec.e0_halfwidth);
  }
  return lq;
}

inline double proposal_density(const ProposalSpec& spec, const ModelSpec& m,
                               const ParamVector& to, const ParamVector& from) {
  const double lq = log_proposal_density(spec, m, to, from);
  return lq == kNegInf ? 0.0 : std::exp(lq);
}

}  // namespace cwdabc
