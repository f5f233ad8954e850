#pragma once

// Fixed random recurrent network with a tanh readout. An activation signal x
// is used as the initial pre-activation state; the free-running dynamics then
// unroll into T two-dimensional motor commands.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace motorfep {

struct ReservoirConfig {
  std::size_t n_r = 100;    // neurons
  double tau = 10.0;        // time constant, in steps
  double p_r = 0.1;         // connection probability
  double sigma_r_sq = 1.5;  // recurrent variance scale (divided by n_r)
  std::size_t n_o = 2;      // readout dimension
  double sigma_o_sq = 1.0;  // readout variance
  std::size_t T = 100;      // primitive duration, in steps
  std::uint64_t seed = 0;

  void validate() const {
    if (n_r < 1) throw ConfigError("reservoir.n_r must be >= 1");
    if (!(tau >= 1.0)) throw ConfigError("reservoir.tau must be >= 1");
    if (!(p_r >= 0.0 && p_r <= 1.0)) throw ConfigError("reservoir.p_r must lie in [0, 1]");
    if (!(sigma_r_sq > 0.0)) throw ConfigError("reservoir.sigma_r_sq must be > 0");
    if (n_o < 1) throw ConfigError("reservoir.n_o must be >= 1");
    if (!(sigma_o_sq > 0.0)) throw ConfigError("reservoir.sigma_o_sq must be > 0");
    if (T < 1) throw ConfigError("reservoir.T must be >= 1");
  }

  friend bool operator==(const ReservoirConfig&, const ReservoirConfig&) = default;
};

/// One non-zero entry of the sparse recurrent matrix.
struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct ReservoirWeights {
  std::size_t n_r = 0;
  std::size_t n_o = 0;
  std::vector<Triplet> recurrent;  // sorted by (row, col)
  std::vector<double> readout;     // n_o x n_r, row-major

  double readout_at(std::size_t o, std::size_t j) const { return readout[o * n_r + j]; }

  std::vector<double> dense_recurrent() const {
    std::vector<double> m(n_r * n_r, 0.0);
    for (const auto& t : recurrent) m[t.row * n_r + t.col] = t.value;
    return m;
  }

  /// Build from a dense row-major n_r x n_r matrix, dropping exact zeros.
  static ReservoirWeights from_dense(std::size_t n_r, std::span<const double> w_r, std::size_t n_o,
                                     std::span<const double> w_o) {
    if (w_r.size() != n_r * n_r || w_o.size() != n_o * n_r)
      throw ShapeError("from_dense: matrix sizes do not match n_r/n_o");
    ReservoirWeights w;
    w.n_r = n_r;
    w.n_o = n_o;
    for (std::size_t i = 0; i < n_r; ++i)
      for (std::size_t j = 0; j < n_r; ++j)
        if (w_r[i * n_r + j] != 0.0)
          w.recurrent.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                 w_r[i * n_r + j]});
    w.readout.assign(w_o.begin(), w_o.end());
    return w;
  }

  friend bool operator==(const ReservoirWeights&, const ReservoirWeights&) = default;
};

struct ReservoirState {
  std::vector<double> u;  // pre-activation
  std::vector<double> r;  // tanh(u)

  friend bool operator==(const ReservoirState&, const ReservoirState&) = default;
};

/// T x n_o motor commands, row-major by time step.
struct ActionSequence {
  std::size_t steps = 0;
  std::size_t dim = 0;
  std::vector<double> a;

  double at(std::size_t t, std::size_t j) const { return a[t * dim + j]; }
  std::span<const double> row(std::size_t t) const { return {a.data() + t * dim, dim}; }

  friend bool operator==(const ActionSequence&, const ActionSequence&) = default;
};

namespace detail {

inline constexpr double kOpenUnit = 1.0 - std::numeric_limits<double>::epsilon() / 2;

// tanh rounds to exactly +-1 beyond |v| ~ 19; keep outputs in the open interval.
inline double open_tanh(double v) { return std::clamp(std::tanh(v), -kOpenUnit, kOpenUnit); }

}  // namespace detail

inline ReservoirWeights init_weights(const ReservoirConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, Stream::weights);
  ReservoirWeights w;
  w.n_r = cfg.n_r;
  w.n_o = cfg.n_o;
  const double sd_r = std::sqrt(cfg.sigma_r_sq / static_cast<double>(cfg.n_r));
  for (std::size_t i = 0; i < cfg.n_r; ++i)
    for (std::size_t j = 0; j < cfg.n_r; ++j)
      if (rng.bernoulli(cfg.p_r))
        w.recurrent.push_back(
            {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), rng.normal(0.0, sd_r)});
  const double sd_o = std::sqrt(cfg.sigma_o_sq);
  w.readout.resize(cfg.n_o * cfg.n_r);
  for (auto& v : w.readout) v = rng.normal(0.0, sd_o);
  return w;
}

inline ReservoirState initial_state(std::span<const double> x) {
  ReservoirState s;
  s.u.assign(x.begin(), x.end());
  s.r.resize(x.size());
  std::transform(s.u.begin(), s.u.end(), s.r.begin(), detail::open_tanh);
  return s;
}

namespace detail {

// In-place step writing the readout into `command`; shapes already checked.
inline void step_into(ReservoirState& s, const ReservoirWeights& w, double tau,
                      std::vector<double>& drive, std::span<double> command) {
  std::fill(drive.begin(), drive.end(), 0.0);
  for (const auto& t : w.recurrent) drive[t.row] += t.value * s.r[t.col];
  const double keep = 1.0 - 1.0 / tau;
  const double inject = 1.0 / tau;
  for (std::size_t i = 0; i < w.n_r; ++i) {
    s.u[i] = keep * s.u[i] + inject * drive[i];
    s.r[i] = open_tanh(s.u[i]);
  }
  for (std::size_t o = 0; o < w.n_o; ++o) {
    double acc = 0.0;
    const double* row = w.readout.data() + o * w.n_r;
    for (std::size_t j = 0; j < w.n_r; ++j) acc += row[j] * s.r[j];
    command[o] = open_tanh(acc);
  }
}

inline void check_state(const ReservoirState& s, const ReservoirWeights& w) {
  if (s.u.size() != w.n_r || s.r.size() != w.n_r)
    throw ShapeError("reservoir state has size " + std::to_string(s.u.size()) + ", weights expect " +
                     std::to_string(w.n_r));
  if (w.readout.size() != w.n_o * w.n_r) throw ShapeError("readout matrix is not n_o x n_r");
}

}  // namespace detail

/// One leaky-integration step followed by the readout.
inline std::pair<ReservoirState, std::vector<double>> step(const ReservoirState& state,
                                                           const ReservoirWeights& w, double tau) {
  detail::check_state(state, w);
  ReservoirState next = state;
  std::vector<double> drive(w.n_r);
  std::vector<double> command(w.n_o);
  detail::step_into(next, w, tau, drive, command);
  return {std::move(next), std::move(command)};
}

struct RunResult {
  ActionSequence actions;
  std::vector<ReservoirState> states;  // filled only when requested; states[t] follows step t+1
};

/// Unroll the network for cfg.T steps from u(0) = x.
inline RunResult run(std::span<const double> x, const ReservoirWeights& w,
                     const ReservoirConfig& cfg, bool keep_states = false) {
  if (x.size() != w.n_r)
    throw ShapeError("activation signal has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(w.n_r));
  ReservoirState s = initial_state(x);
  detail::check_state(s, w);
  RunResult out;
  out.actions.steps = cfg.T;
  out.actions.dim = w.n_o;
  out.actions.a.resize(cfg.T * w.n_o);
  if (keep_states) out.states.reserve(cfg.T);
  std::vector<double> drive(w.n_r);
  for (std::size_t t = 0; t < cfg.T; ++t) {
    detail::step_into(s, w, cfg.tau, drive, {out.actions.a.data() + t * w.n_o, w.n_o});
    if (keep_states) out.states.push_back(s);
  }
  return out;
}

}  // namespace motorfep
