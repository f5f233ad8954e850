#pragma once

// Learning a repertoire of motor primitives.
//
// Each episode picks a primitive k uniformly, perturbs its activation signal
// antithetically (x_k + dx, x_k - dx), draws both resulting trajectories on a
// blank canvas, scores each drawing with F1 under the current Kohonen map and
// a prior centered on k, then moves x_k against the two-point slope:
//
//   x_k <- x_k - lambda * (f_plus - f_minus) * dx
//
// The map is trained on both drawings in the same episode, after scoring.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "canvas.hpp"
#include "errors.hpp"
#include "free_energy.hpp"
#include "kohonen.hpp"
#include "reservoir.hpp"
#include "rng.hpp"

namespace motorfep {

/// Piecewise-linear function of the episode index, constant beyond both ends.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    validate();
  }

  static Schedule constant(double v) { return Schedule({{0.0, v}}); }

  void validate() const {
    if (points_.empty()) throw ConfigError("schedule needs at least one breakpoint");
    for (std::size_t i = 1; i < points_.size(); ++i)
      if (!(points_[i].first >= points_[i - 1].first))
        throw ConfigError("schedule breakpoints must be sorted by episode");
  }

  double operator()(double e) const {
    if (points_.empty()) throw ConfigError("empty schedule");
    if (e <= points_.front().first) return points_.front().second;
    if (e >= points_.back().first) return points_.back().second;
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const auto [x1, y1] = points_[i];
      if (e <= x1) {
        const auto [x0, y0] = points_[i - 1];
        if (x1 == x0) return y1;
        return y0 + (y1 - y0) * (e - x0) / (x1 - x0);
      }
    }
    return points_.back().second;
  }

  const std::vector<std::pair<double, double>>& points() const { return points_; }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<std::pair<double, double>> points_;
};

inline double schedule_eval(double e, const Schedule& s) { return s(e); }

/// Breakpoint position of the end of the high-variance exploration phase.
inline constexpr double kExplorationFraction = 0.625;

/// Search variance: 2.0 while exploring, then linear decay to 0.1 at E.
inline Schedule default_search_schedule(std::size_t episodes) {
  const auto E = static_cast<double>(episodes);
  return Schedule({{0.0, 2.0}, {kExplorationFraction * E, 2.0}, {E, 0.1}});
}

/// Kohonen width: 10 decaying to 2 at the end of exploration, then held.
inline Schedule default_kohonen_schedule(std::size_t episodes) {
  const auto E = static_cast<double>(episodes);
  return Schedule({{0.0, 10.0}, {kExplorationFraction * E, 2.0}});
}

struct TrainConfig {
  std::size_t episodes = 20000;  // E
  double lambda = 0.01;
  Schedule search_variance = default_search_schedule(20000);
  Schedule kohonen_width = default_kohonen_schedule(20000);
  double beta = 8.0;
  bool train_kohonen = true;
  StateDistance distance = StateDistance::cyclic;

  void validate() const {
    if (!(lambda > 0.0)) throw ConfigError("train.lambda must be > 0");
    if (!(beta > 0.0)) throw ConfigError("train.beta must be > 0");
    search_variance.validate();
    kohonen_width.validate();
    for (const auto& [e, v] : search_variance.points())
      if (!(v > 0.0)) throw ConfigError("search variance schedule must stay positive");
    for (const auto& [e, v] : kohonen_width.points())
      if (!(v > 0.0)) throw ConfigError("Kohonen width schedule must stay positive");
  }
};

/// Everything needed to learn (and later replay) a repertoire.
struct LearnerSetup {
  std::size_t n = 50;  // primitives = Kohonen units
  ReservoirConfig reservoir;
  ArmConfig arm = ArmConfig::centered();
  KohonenParams kohonen;  // sigma_k_sq is overridden by the width schedule
  LikelihoodParams likelihood;
  TrainConfig train;
  std::uint64_t seed = 0;  // signals, search noise and map initialization

  void validate() const {
    if (n < 1) throw ConfigError("repertoire size n must be >= 1");
    reservoir.validate();
    if (reservoir.n_o != 2) throw ConfigError("the drawing arm needs reservoir.n_o = 2");
    arm.validate();
    likelihood.validate();
    train.validate();
    KohonenParams probe = kohonen;
    probe.sigma_k_sq = 1.0;
    probe.validate();
  }
};

struct Repertoire {
  std::vector<std::vector<double>> signals;  // x_k, each of length n_r
  ReservoirConfig reservoir;
  ArmConfig arm;
  std::uint64_t seed = 0;

  std::size_t size() const { return signals.size(); }

  friend bool operator==(const Repertoire&, const Repertoire&) = default;
};

/// Activation signals drawn i.i.d. N(0, 1); the untrained starting point.
inline Repertoire random_repertoire(std::size_t n, const ReservoirConfig& cfg, std::uint64_t seed,
                                    const ArmConfig& arm = ArmConfig::centered()) {
  Rng rng(seed, Stream::signals);
  Repertoire rep{{}, cfg, arm, seed};
  rep.signals.assign(n, std::vector<double>(cfg.n_r));
  for (auto& x : rep.signals)
    for (auto& v : x) v = rng.normal();
  return rep;
}

/// Draw the primitive encoded by x onto `env`.
inline void execute_primitive(EnvState& env, std::span<const double> x, const ReservoirWeights& w,
                              const ReservoirConfig& cfg, const ArmConfig& arm) {
  apply_actions_inplace(env, run(x, w, cfg).actions, arm);
}

/// Observation of a single primitive drawn from a blank canvas and centered pen.
inline Observation rollout(std::span<const double> x, const ReservoirWeights& w,
                           const ReservoirConfig& cfg, const ArmConfig& arm) {
  EnvState env = EnvState::fresh(arm);
  execute_primitive(env, x, w, cfg, arm);
  return observe(env);
}

/// x <- x - lambda * (f_plus - f_minus) * dx
inline void antithetic_update(std::span<double> x, double f_plus, double f_minus,
                              std::span<const double> dx, double lambda) {
  if (x.size() != dx.size()) throw ShapeError("perturbation length mismatch");
  const double coeff = lambda * (f_plus - f_minus);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= coeff * dx[i];
}

struct EpisodeRecord {
  std::size_t episode = 0;
  std::size_t k = 0;
  double f_plus = 0.0;
  double f_minus = 0.0;
  double complexity = 0.0;  // mean over the two rollouts
  double inaccuracy = 0.0;  // mean over the two rollouts
  std::size_t i_w = 0;      // winner for the x + dx rollout
  double sigma_search = 0.0;
  double sigma_kohonen = 0.0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

inline KohonenMap initial_map(const LearnerSetup& setup) {
  Rng rng(setup.seed, Stream::kohonen);
  return KohonenMap::random(setup.n, kPixels, rng, setup.likelihood.eps);
}

inline EpisodeRecord train_episode(Repertoire& rep, KohonenMap& map, const ReservoirWeights& w,
                                   const LearnerSetup& setup, std::size_t e, Rng& rng) {
  const auto& tc = setup.train;
  const std::size_t n = rep.size();
  EpisodeRecord rec;
  rec.episode = e;
  rec.k = static_cast<std::size_t>(rng.index(n));
  rec.sigma_search = tc.search_variance(static_cast<double>(e));
  rec.sigma_kohonen = tc.kohonen_width(static_cast<double>(e));

  auto& x = rep.signals[rec.k];
  const double sd = std::sqrt(rec.sigma_search);
  std::vector<double> dx(x.size());
  for (auto& v : dx) v = rng.normal(0.0, sd);

  std::vector<double> plus(x), minus(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] += dx[i];
    minus[i] -= dx[i];
  }
  const Observation o_plus = rollout(plus, w, rep.reservoir, rep.arm);
  const Observation o_minus = rollout(minus, w, rep.reservoir, rep.arm);

  const auto fp = free_energy_f1(o_plus.view(), map, rec.k, tc.beta, tc.distance, setup.likelihood);
  const auto fm = free_energy_f1(o_minus.view(), map, rec.k, tc.beta, tc.distance, setup.likelihood);
  if (!std::isfinite(fp.total) || !std::isfinite(fm.total))
    throw NumericError("non-finite free energy at episode " + std::to_string(e));

  rec.f_plus = fp.total;
  rec.f_minus = fm.total;
  rec.complexity = 0.5 * (fp.complexity + fm.complexity);
  rec.inaccuracy = 0.5 * (fp.inaccuracy + fm.inaccuracy);
  rec.i_w = fp.winner;

  antithetic_update(x, rec.f_plus, rec.f_minus, dx, tc.lambda);

  if (tc.train_kohonen) {
    KohonenParams kp = setup.kohonen;
    kp.sigma_k_sq = rec.sigma_kohonen;
    update_inplace(map, o_plus.view(), winner(map, o_plus.view()), kp);
    update_inplace(map, o_minus.view(), winner(map, o_minus.view()), kp);
  }
  return rec;
}

struct TrainResult {
  Repertoire repertoire;
  KohonenMap map;
  ReservoirWeights weights;
  std::vector<EpisodeRecord> log;
};

struct TrainHooks {
  std::function<void(const EpisodeRecord&)> on_episode;
  std::size_t checkpoint_every = 0;  // 0 disables checkpoints
  std::function<void(std::size_t, const Repertoire&, const KohonenMap&)> on_checkpoint;
};

inline TrainResult train(const LearnerSetup& setup, const TrainHooks& hooks = {}) {
  setup.validate();
  TrainResult out;
  out.weights = init_weights(setup.reservoir);
  out.repertoire = random_repertoire(setup.n, setup.reservoir, setup.seed, setup.arm);
  out.map = initial_map(setup);
  out.log.reserve(setup.train.episodes);
  Rng rng(setup.seed, Stream::search);
  for (std::size_t e = 0; e < setup.train.episodes; ++e) {
    out.log.push_back(train_episode(out.repertoire, out.map, out.weights, setup, e, rng));
    if (hooks.on_episode) hooks.on_episode(out.log.back());
    if (hooks.checkpoint_every && hooks.on_checkpoint && (e + 1) % hooks.checkpoint_every == 0)
      hooks.on_checkpoint(e + 1, out.repertoire, out.map);
  }
  return out;
}

/// Winner of every primitive's noise-free drawing.
inline std::vector<std::size_t> primitive_winners(const Repertoire& rep, const KohonenMap& map,
                                                  const ReservoirWeights& w) {
  std::vector<std::size_t> out;
  out.reserve(rep.size());
  for (const auto& x : rep.signals)
    out.push_back(winner(map, rollout(x, w, rep.reservoir, rep.arm).view()));
  return out;
}

/// Mean cyclic distance between each primitive's winner and its own index.
inline double mean_winner_distance(const Repertoire& rep, const KohonenMap& map,
                                   const ReservoirWeights& w) {
  const auto winners = primitive_winners(rep, map, w);
  double acc = 0.0;
  for (std::size_t k = 0; k < winners.size(); ++k)
    acc += static_cast<double>(cyclic_distance(winners[k], k, map.size()));
  return acc / static_cast<double>(winners.size());
}

struct BetaSweepRow {
  double beta = 0.0;
  double mean_distance = 0.0;           // averaged over seeds
  std::vector<double> per_seed_distance;
};

/// Train once per (beta, seed) and report the final winner-to-index distance.
inline std::vector<BetaSweepRow> beta_sweep(std::span<const double> betas, LearnerSetup setup,
                                            std::span<const std::uint64_t> seeds) {
  if (betas.empty()) throw ConfigError("beta sweep needs at least one beta");
  if (seeds.empty()) throw ConfigError("beta sweep needs at least one seed");
  std::vector<BetaSweepRow> rows;
  for (double beta : betas) {
    BetaSweepRow row{beta, 0.0, {}};
    for (auto seed : seeds) {
      setup.train.beta = beta;
      setup.seed = seed;
      setup.reservoir.seed = seed;
      const auto result = train(setup);
      row.per_seed_distance.push_back(
          mean_winner_distance(result.repertoire, result.map, result.weights));
    }
    for (double d : row.per_seed_distance) row.mean_distance += d;
    row.mean_distance /= static_cast<double>(seeds.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace motorfep
