#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cwdabc/data.hpp"
#include "cwdabc/distributions.hpp"
#include "cwdabc/errors.hpp"
#include "cwdabc/model.hpp"
#include "cwdabc/observe.hpp"
#include "cwdabc/rng.hpp"
#include "cwdabc/simulate.hpp"

namespace cwdabc {

/// Substream purposes; combined with the master seed and per-task ids so no
/// two tasks ever share a stream.
namespace stream_tag {
inline constexpr std::uint64_t attempt = 1;
inline constexpr std::uint64_t dataset = 2;
inline constexpr std::uint64_t ensemble = 3;
inline constexpr std::uint64_t study = 4;
}  // namespace stream_tag

struct Particle {
  int model_index = 0;  // 1-based position in the run's model menu
  ParamVector theta;
  double log_weight = kNegInf;
  double norm_weight = 0;  // within-model, sums to 1 per model

  double weight() const { return std::exp(log_weight); }
};

struct Population {
  int generation = 0;  // 1-based
  double tolerance = 0;
  std::vector<Particle> particles;
  std::uint64_t attempts = 0;  // proposal attempts up to the Nth acceptance
  double wall_seconds = 0;

  double acceptance_rate() const {
    return attempts == 0 ? 0.0
                         : static_cast<double>(particles.size()) /
                               static_cast<double>(attempts);
  }
};

struct RunConfig {
  std::vector<double> tolerances = {7, 6, 5, 4, 3.5, 3};
  int n_particles = 2500;
  int replicates = 5;  // B_t: candidate datasets per proposal
  double step = 1.0 / 12.0;
  std::uint64_t seed = 0;
  std::uint64_t max_attempts = 1000000;  // per particle slot
  int threads = 1;

  void validate() const {
    if (tolerances.empty())
      throw ValidationError("tolerance schedule is empty");
    double prev = std::numeric_limits<double>::infinity();
    for (double xi : tolerances) {
      if (!(xi > 0) || !(xi < prev))
        throw ValidationError(
            "tolerance schedule must be strictly decreasing and positive");
      prev = xi;
    }
    if (n_particles < 1) throw ValidationError("n_particles must be >= 1");
    if (replicates < 1) throw ValidationError("replicates must be >= 1");
    if (!(step > 0)) throw ValidationError("step must be positive");
    if (threads < 1) throw ValidationError("threads must be >= 1");
    if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
  }
};

/// rho(D*, D): mean absolute difference of the observed-death series,
/// pooled over every observation of every epidemic.
inline double distance(const std::vector<ObservedSeries>& sim,
                       const std::vector<ObservedSeries>& obs) {
  if (sim.size() != obs.size())
    throw std::invalid_argument("distance: epidemic count mismatch");
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t e = 0; e < sim.size(); ++e) {
    if (sim[e].times.size() != obs[e].times.size() ||
        !std::equal(sim[e].times.begin(), sim[e].times.end(),
                    obs[e].times.begin()))
      throw std::invalid_argument("distance: observation grids differ");
    for (std::size_t i = 0; i < sim[e].counts.size(); ++i) {
      sum += std::fabs(
          static_cast<double>(sim[e].counts[i] - obs[e].counts[i]));
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("distance: no observations");
  return sum / static_cast<double>(n);
}

namespace detail {

inline Trajectory simulate_latent(ProcessKind kind, const DynParams& p,
                                  const InitialConditions& ic,
                                  const Epidemic& epi, double step,
                                  RngStream& rng) {
  StateVector x0(state_dim(kind));
  x0[kS] = static_cast<double>(ic.s0);
  x0[kI] = static_cast<double>(ic.i0);
  if (is_indirect(kind)) x0[kE] = ic.e0;
  x0[x0.size() - 1] = 0.0;  // C(t0) = 0
  const TimeGrid grid = epi.grid(step);
  const EnvSchedule sched = epi.schedule();
  switch (kind) {
    case ProcessKind::DirectOde:
    case ProcessKind::IndirectOde:
      return simulate_ode(kind, p, x0, grid, sched);
    case ProcessKind::DirectCtmc:
      return simulate_ctmc(p, x0, grid, sched, rng);
    case ProcessKind::DirectSde:
    case ProcessKind::IndirectSde:
      return simulate_sde(kind, p, x0, grid, sched, rng);
  }
  throw std::logic_error("unreachable");
}

}  // namespace detail

/// Simulates one full candidate dataset (all epidemics, latent process +
/// observation layer). Returns nothing if any simulator diverges.
inline std::optional<std::vector<ObservedSeries>> simulate_dataset(
    const ModelSpec& m, const ParamVector& theta, const EpidemicData& data,
    double step, std::uint64_t stream_seed) {
  std::vector<ObservedSeries> out;
  out.reserve(data.epidemics.size());
  try {
    for (std::size_t e = 0; e < data.epidemics.size(); ++e) {
      RngStream rng(derive_seed(stream_seed, {static_cast<std::uint64_t>(e)}));
      const Trajectory traj = detail::simulate_latent(
          m.process, theta.dyn, theta.ics[e], data.epidemics[e], step, rng);
      out.push_back(observe(m.data, traj, rng));
    }
  } catch (const DivergenceError&) {
    return std::nullopt;
  }
  return out;
}

/// Step 5: count how many of B_t replicate datasets land within xi of the
/// observations. Deterministic process models reuse one latent path and
/// only redraw the observation layer. Every (replicate, epidemic) pair gets
/// its own derived substream, so the set of random numbers a replicate sees
/// does not depend on xi or on early termination of other replicates.
inline int hit_count(const ModelSpec& m, const ParamVector& theta,
                     const EpidemicData& data, const RunConfig& cfg, double xi,
                     RngStream& rng) {
  const std::uint64_t base = rng.engine()();
  const auto obs = data.observed_series();
  const double n_total = static_cast<double>(data.total_obs());
  const double miss_budget = xi * n_total;  // partial sums above this miss
  int hits = 0;

  std::vector<Trajectory> fixed_latent;
  if (is_deterministic(m.process)) {
    try {
      for (std::size_t e = 0; e < data.epidemics.size(); ++e) {
        RngStream none(0);
        fixed_latent.push_back(detail::simulate_latent(
            m.process, theta.dyn, theta.ics[e], data.epidemics[e], cfg.step,
            none));
      }
    } catch (const DivergenceError&) {
      return 0;  // divergence is a miss, not an error
    }
  }

  for (int b = 0; b < cfg.replicates; ++b) {
    double sum = 0;
    bool miss = false;
    for (std::size_t e = 0; e < data.epidemics.size() && !miss; ++e) {
      RngStream rep(derive_seed(
          base, {static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(e)}));
      ObservedSeries sim;
      if (is_deterministic(m.process)) {
        sim = observe(m.data, fixed_latent[e], rep);
      } else {
        try {
          const Trajectory traj =
              detail::simulate_latent(m.process, theta.dyn, theta.ics[e],
                                      data.epidemics[e], cfg.step, rep);
          sim = observe(m.data, traj, rep);
        } catch (const DivergenceError&) {
          miss = true;
          break;
        }
      }
      for (std::size_t i = 0; i < sim.counts.size(); ++i)
        sum += std::fabs(
            static_cast<double>(sim.counts[i] - obs[e].counts[i]));
      if (sum > miss_budget) miss = true;
    }
    if (!miss && sum <= miss_budget) ++hits;
  }
  return hits;
}

/// Step 7 weight in log space. prev holds the previous generation's
/// particles of the same model with their normalized weights.
inline double log_particle_weight(int t, const ModelSpec& m,
                                  const ParamVector& theta, int b_t,
                                  const PriorSpec& priors,
                                  const ProposalSpec& props,
                                  const std::vector<const Particle*>& prev) {
  if (b_t < 1) throw std::invalid_argument("weight undefined for b_t < 1");
  if (t <= 1) return std::log(static_cast<double>(b_t));
  if (prev.empty())
    throw std::invalid_argument("weight undefined: empty previous population");
  double denom = 0;
  for (const Particle* j : prev)
    denom += j->norm_weight * proposal_density(props, m, theta, j->theta);
  if (!(denom > 0)) return kNegInf;
  return log_prior_density(priors, m, theta) +
         std::log(static_cast<double>(b_t)) - std::log(denom);
}

inline double particle_weight(int t, const ModelSpec& m,
                              const ParamVector& theta, int b_t,
                              const PriorSpec& priors,
                              const ProposalSpec& props,
                              const std::vector<const Particle*>& prev) {
  const double lw = log_particle_weight(t, m, theta, b_t, priors, props, prev);
  return lw == kNegInf ? 0.0 : std::exp(lw);
}

namespace detail {

/// Previous-generation view of one model: particles plus a cumulative
/// normalized-weight table for O(log n) weighted selection.
struct ModelTable {
  std::vector<const Particle*> particles;
  std::vector<double> cum_weight;

  const Particle* pick(double u) const {
    const auto it =
        std::upper_bound(cum_weight.begin(), cum_weight.end(), u);
    const std::size_t k = std::min(
        static_cast<std::size_t>(it - cum_weight.begin()),
        particles.size() - 1);
    return particles[k];
  }
};

inline std::vector<ModelTable> build_tables(const Population& pop,
                                            std::size_t n_models) {
  std::vector<ModelTable> tables(n_models);
  for (const Particle& p : pop.particles)
    tables[static_cast<std::size_t>(p.model_index - 1)].particles.push_back(
        &p);
  for (ModelTable& tab : tables) {
    double acc = 0;
    tab.cum_weight.reserve(tab.particles.size());
    for (const Particle* p : tab.particles) {
      acc += p->norm_weight;
      tab.cum_weight.push_back(acc);
    }
  }
  return tables;
}

/// Normalize weights within each model via log-sum-exp.
inline void normalize_weights(std::vector<Particle>& particles,
                              std::size_t n_models) {
  std::vector<double> max_log(n_models, kNegInf);
  for (const Particle& p : particles) {
    const auto m = static_cast<std::size_t>(p.model_index - 1);
    max_log[m] = std::max(max_log[m], p.log_weight);
  }
  std::vector<double> sums(n_models, 0.0);
  for (Particle& p : particles) {
    const auto m = static_cast<std::size_t>(p.model_index - 1);
    p.norm_weight = std::exp(p.log_weight - max_log[m]);
    sums[m] += p.norm_weight;
  }
  for (Particle& p : particles) {
    const auto m = static_cast<std::size_t>(p.model_index - 1);
    p.norm_weight /= sums[m];
  }
}

}  // namespace detail

using GenerationCallback = std::function<void(const Population&)>;

/// The ABC SMC sampler: joint model selection and parameter inference.
///
/// Per generation, proposal attempts are numbered 0, 1, 2, ... and each
/// attempt's entire evaluation (model index from the uniform model prior,
/// parameter draw, B_t simulations, weight) runs on a stream derived from
/// (seed, generation, attempt). The population is the first N successful
/// attempts in attempt order, so any thread count produces identical output.
///
/// An attempt fails when the drawn model has no surviving particles in the
/// previous generation, when the prior density of the proposal is zero
/// (Step 4), or when no replicate lands within tolerance (Step 6). A run of
/// more than max_attempts consecutive failures aborts the run.
inline std::vector<Population> run_abc_smc(
    const RunConfig& cfg, const PriorSpec& priors, const ProposalSpec& props,
    const EpidemicData& data, std::vector<ModelSpec> menu,
    const GenerationCallback& on_generation = {}) {
  cfg.validate();
  if (menu.empty()) throw ValidationError("model menu is empty");
  if (data.epidemics.empty()) throw ValidationError("no epidemics in data");
  for (const Epidemic& e : data.epidemics) {
    if (e.times.empty() || e.observed.size() != e.times.size())
      throw ValidationError("malformed epidemic data");
    e.grid(cfg.step);  // validates the observation lattice up front
  }
  const auto n_models = menu.size();
  for (std::size_t i = 0; i < n_models; ++i)
    menu[i].index = static_cast<int>(i) + 1;
  const int n_epi = static_cast<int>(data.epidemics.size());
  const auto n = static_cast<std::size_t>(cfg.n_particles);

  std::vector<Population> history;
  std::vector<detail::ModelTable> prev_tables;

  for (std::size_t gen = 1; gen <= cfg.tolerances.size(); ++gen) {
    const double xi = cfg.tolerances[gen - 1];
    const auto t_start = std::chrono::steady_clock::now();

    // one proposal attempt, pure function of (seed, gen, k) and prev_tables
    auto evaluate = [&](std::uint64_t k) -> std::optional<Particle> {
      RngStream rng = RngStream::substream(
          cfg.seed, {stream_tag::attempt, static_cast<std::uint64_t>(gen), k});
      const auto m_idx = static_cast<int>(
          rng.uniform_int(1, static_cast<std::int64_t>(n_models)));
      const ModelSpec& m = menu[static_cast<std::size_t>(m_idx - 1)];
      ParamVector theta;
      if (gen == 1) {
        theta = prior_sample(priors, m, n_epi, rng);
      } else {
        const detail::ModelTable& tab =
            prev_tables[static_cast<std::size_t>(m_idx - 1)];
        if (tab.particles.empty()) return std::nullopt;  // model died out
        const Particle* star = tab.pick(rng.uniform());
        theta = proposal_sample(props, m, star->theta, rng);
      }
      const double lp = log_prior_density(priors, m, theta);
      if (lp == kNegInf) return std::nullopt;  // Step 4
      const int b = hit_count(m, theta, data, cfg, xi, rng);
      if (b == 0) return std::nullopt;  // Step 6
      double lw;
      if (gen == 1) {
        lw = std::log(static_cast<double>(b));
      } else {
        const detail::ModelTable& tab =
            prev_tables[static_cast<std::size_t>(m_idx - 1)];
        double denom = 0;
        for (const Particle* j : tab.particles)
          denom += j->norm_weight * proposal_density(props, m, theta, j->theta);
        if (!(denom > 0)) return std::nullopt;
        lw = lp + std::log(static_cast<double>(b)) - std::log(denom);
      }
      return Particle{m_idx, std::move(theta), lw, 0.0};
    };

    std::vector<Particle> accepted;
    accepted.reserve(n);
    std::uint64_t next_attempt = 0;
    std::uint64_t attempts_used = 0;
    std::uint64_t fail_streak = 0;

    while (accepted.size() < n) {
      const double rate =
          static_cast<double>(accepted.size() + 1) /
          static_cast<double>(next_attempt + 1);
      const auto want = static_cast<std::uint64_t>(std::ceil(
          static_cast<double>(n - accepted.size()) / std::max(rate, 1e-3)));
      const std::uint64_t block = std::clamp<std::uint64_t>(
          want, static_cast<std::uint64_t>(cfg.threads), 8192);

      std::vector<std::optional<Particle>> results(block);
      if (cfg.threads == 1 || block == 1) {
        for (std::uint64_t i = 0; i < block; ++i)
          results[i] = evaluate(next_attempt + i);
      } else {
        std::atomic<std::uint64_t> cursor{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
          try {
            for (;;) {
              const std::uint64_t i = cursor.fetch_add(1);
              if (i >= block) return;
              results[i] = evaluate(next_attempt + i);
            }
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        };
        std::vector<std::thread> pool;
        const auto n_workers = std::min<std::uint64_t>(
            static_cast<std::uint64_t>(cfg.threads), block);
        pool.reserve(n_workers);
        for (std::uint64_t w = 0; w < n_workers; ++w)
          pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
        if (error) std::rethrow_exception(error);
      }

      for (std::uint64_t i = 0; i < block && accepted.size() < n; ++i) {
        if (results[i]) {
          fail_streak = 0;
          accepted.push_back(std::move(*results[i]));
          attempts_used = next_attempt + i + 1;
        } else if (++fail_streak > cfg.max_attempts) {
          throw ScheduleTooTightError(
              "generation " + std::to_string(gen) + ": no acceptance in " +
                  std::to_string(cfg.max_attempts) +
                  " attempts at tolerance " + std::to_string(xi) +
                  " (accepted " + std::to_string(accepted.size()) + "/" +
                  std::to_string(n) + ")",
              static_cast<int>(gen),
              static_cast<double>(accepted.size()) /
                  static_cast<double>(next_attempt + i + 1));
        }
      }
      next_attempt += block;
    }

    detail::normalize_weights(accepted, n_models);

    Population pop;
    pop.generation = static_cast<int>(gen);
    pop.tolerance = xi;
    pop.particles = std::move(accepted);
    pop.attempts = attempts_used;
    pop.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    history.push_back(std::move(pop));
    prev_tables = detail::build_tables(history.back(), n_models);
    if (on_generation) on_generation(history.back());
  }
  return history;
}

}  // namespace cwdabc
