#pragma once

// Variational quantities over discrete hidden states. All logarithms are
// natural, so every value here is in nats.
//
//   F1(o)    = KL(q || p) - sum_i q(s_i) ln p(o | s_i)
//            = -ln p(s_iw) - ln p(o | s_iw)        (one-hot q at the SOM winner)
//   E[F2(k)] = KL(q_k || pi) +/- sum_i q_k(i) H(p(o | sigma_i))

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kohonen.hpp"

namespace motorfep {

/// Discrete distribution; entries >= 0 summing to one.
struct Categorical {
  std::vector<double> p;

  std::size_t size() const { return p.size(); }
  double operator[](std::size_t i) const { return p[i]; }

  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  bool is_valid(double tol = 1e-12) const {
    if (p.empty()) return false;
    double s = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
      s += v;
    }
    return std::abs(s - 1.0) <= tol;
  }

  /// Normalizes non-negative weights; throws if they do not have positive mass.
  static Categorical from_weights(std::vector<double> w) {
    double s = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("categorical weights must be finite and >= 0");
      s += v;
    }
    if (!(s > 0.0)) throw ConfigError("categorical weights have zero mass");
    for (double& v : w) v /= s;
    return {std::move(w)};
  }

  /// softmax(logits), computed with the max-shift for stability.
  static Categorical softmax(std::span<const double> logits) {
    if (logits.empty()) throw ShapeError("softmax of an empty vector");
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> w(logits.size());
    std::transform(logits.begin(), logits.end(), w.begin(),
                   [top](double v) { return std::exp(v - top); });
    return from_weights(std::move(w));
  }

  friend bool operator==(const Categorical&, const Categorical&) = default;
};

enum class StateDistance { linear, cyclic };
enum class AmbiguitySign { plus, minus };

struct LikelihoodParams {
  double eps = kDefaultEps;

  void validate() const {
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("likelihood.eps must lie in (0, 0.5)");
  }
};

struct FreeEnergyBreakdown {
  double complexity = 0.0;
  double inaccuracy = 0.0;
  double total = 0.0;
  std::size_t winner = 0;
};

inline double state_distance(std::size_t k, std::size_t i, std::size_t n, StateDistance metric) {
  if (metric == StateDistance::cyclic) return static_cast<double>(cyclic_distance(k, i, n));
  return static_cast<double>(k > i ? k - i : i - k);
}

/// Prior centered on primitive k: p(s_i) proportional to exp(-beta * dist(k, i)).
inline Categorical prior_over_states(std::size_t k, std::size_t n, double beta,
                                     StateDistance metric = StateDistance::cyclic) {
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  if (n == 0 || k >= n) throw ConfigError("primitive index out of range");
  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) logits[i] = -beta * state_distance(k, i, n, metric);
  return Categorical::softmax(logits);
}

/// ln p(s_i) for the same prior, without underflow for far states.
inline double log_prior(std::size_t i, std::size_t k, std::size_t n, double beta,
                        StateDistance metric = StateDistance::cyclic) {
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  if (n == 0 || k >= n || i >= n) throw ConfigError("primitive index out of range");
  // The k-th term is exp(0) = 1, so the normalizer never underflows.
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) z += std::exp(-beta * state_distance(k, j, n, metric));
  return -beta * state_distance(k, i, n, metric) - std::log(z);
}

/// ln p(o | filter) for independent Bernoulli pixels. Filter values are clipped
/// into [eps, 1 - eps] first, so the result is always finite.
inline double log_likelihood(std::span<const double> o, std::span<const double> filter,
                             const LikelihoodParams& params = {}) {
  if (o.size() != filter.size())
    throw ShapeError("observation length " + std::to_string(o.size()) + " vs filter length " +
                     std::to_string(filter.size()));
  const double lo = params.eps, hi = 1.0 - params.eps;
  double acc = 0.0;
  for (std::size_t l = 0; l < o.size(); ++l) {
    const double w = std::clamp(filter[l], lo, hi);
    acc += o[l] * std::log(w) + (1.0 - o[l]) * std::log1p(-w);
  }
  return acc;
}

inline FreeEnergyBreakdown free_energy_f1(std::span<const double> o, const KohonenMap& map,
                                          std::size_t k, double beta,
                                          StateDistance metric = StateDistance::cyclic,
                                          const LikelihoodParams& params = {}) {
  FreeEnergyBreakdown out;
  out.winner = winner(map, o);
  out.complexity = -log_prior(out.winner, k, map.size(), beta, metric);
  out.inaccuracy = -log_likelihood(o, map.filter(out.winner), params);
  out.total = out.complexity + out.inaccuracy;
  return out;
}

inline double bernoulli_entropy(std::span<const double> filter) {
  double h = 0.0;
  for (double w : filter) {
    if (w > 0.0) h -= w * std::log(w);
    if (w < 1.0) h -= (1.0 - w) * std::log1p(-w);
  }
  return h;
}

inline constexpr double kProbabilityFloor = 1e-12;

/// KL(q || p) with p floored at 1e-12; terms with q_i = 0 contribute nothing.
inline double kl_divergence(const Categorical& q, const Categorical& p) {
  if (q.size() != p.size()) throw ShapeError("KL between distributions of different sizes");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    acc += q[i] * (std::log(q[i]) - std::log(std::max(p[i], kProbabilityFloor)));
  }
  return acc;
}

/// KL to the preferences plus (or, with `minus`, minus) the expected filter entropy.
inline double expected_free_energy(const Categorical& q_k, const Categorical& prior,
                                   std::span<const double> entropies,
                                   AmbiguitySign sign = AmbiguitySign::plus) {
  if (entropies.size() != q_k.size()) throw ShapeError("one entropy per state is required");
  double ambiguity = 0.0;
  for (std::size_t i = 0; i < q_k.size(); ++i) ambiguity += q_k[i] * entropies[i];
  const double s = sign == AmbiguitySign::plus ? 1.0 : -1.0;
  return kl_divergence(q_k, prior) + s * ambiguity;
}

}  // namespace motorfep
