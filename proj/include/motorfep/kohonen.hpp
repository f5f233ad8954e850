#pragma once

// Self-organizing map on a one-dimensional ring. Row i of the filter matrix is
// both the prototype of unit i and the per-pixel Bernoulli parameters of
// hidden state s_i, so entries are kept inside [eps, 1 - eps].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace motorfep {

inline constexpr double kDefaultEps = 1e-3;

enum class UpdateRule {
  convex,         // W[i] <- (1 - lambda N_i) W[i] + lambda N_i o
  literal,  // W <- (1 - lambda) W + lambda N (.) o, every row decays
};

enum class NeighborhoodKernel {
  gaussian,   // exp(-d^2 / (2 sigma^2))
  laplacian,  // exp(-d / sigma)
};

struct KohonenParams {
  double lambda_k = 0.01;
  double sigma_k_sq = 1.0;
  UpdateRule rule = UpdateRule::convex;
  NeighborhoodKernel kernel = NeighborhoodKernel::gaussian;

  void validate() const {
    if (!(lambda_k > 0.0 && lambda_k <= 1.0))
      throw ConfigError("kohonen.lambda must lie in (0, 1]");
    if (!(sigma_k_sq > 0.0)) throw ConfigError("kohonen width must be > 0");
  }
};

class KohonenMap {
 public:
  KohonenMap() = default;
  KohonenMap(std::size_t n, std::size_t d, double eps = kDefaultEps)
      : n_(n), d_(d), eps_(eps), w_(n * d, 0.5) {
    if (n == 0 || d == 0) throw ConfigError("Kohonen map needs n >= 1 and d >= 1");
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("eps must lie in (0, 0.5)");
  }

  /// Filters drawn uniformly in [lo, hi] (broad, uninformative prototypes).
  static KohonenMap random(std::size_t n, std::size_t d, Rng& rng, double eps = kDefaultEps,
                           double lo = 0.25, double hi = 0.75) {
    KohonenMap m(n, d, eps);
    for (auto& v : m.w_) v = std::clamp(rng.uniform(lo, hi), eps, 1.0 - eps);
    return m;
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  double eps() const { return eps_; }

  std::span<const double> filter(std::size_t i) const { return {w_.data() + i * d_, d_}; }
  std::span<double> filter(std::size_t i) { return {w_.data() + i * d_, d_}; }
  std::span<const double> data() const { return w_; }

  /// Overwrite row i, clipping into [eps, 1 - eps].
  void set_filter(std::size_t i, std::span<const double> values) {
    if (values.size() != d_) throw ShapeError("filter length mismatch");
    auto row = filter(i);
    for (std::size_t l = 0; l < d_; ++l) row[l] = clip(values[l]);
  }

  double clip(double v) const { return std::clamp(v, eps_, 1.0 - eps_); }

  friend bool operator==(const KohonenMap&, const KohonenMap&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  double eps_ = kDefaultEps;
  std::vector<double> w_;
};

inline std::size_t cyclic_distance(std::size_t i, std::size_t j, std::size_t n) {
  const std::size_t diff = i > j ? i - j : j - i;
  return std::min(diff, n - diff);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double diff = a[l] - b[l];
    acc += diff * diff;
  }
  return acc;
}

/// Index of the nearest filter (squared Euclidean); ties go to the lowest index.
inline std::size_t winner(const KohonenMap& map, std::span<const double> o) {
  if (o.size() != map.dim())
    throw ShapeError("observation length " + std::to_string(o.size()) + " vs filter length " +
                     std::to_string(map.dim()));
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double dist = squared_distance(map.filter(i), o);
    if (dist < best_d) {
      best_d = dist;
      best = i;
    }
  }
  return best;
}

inline std::vector<double> neighborhood(std::size_t i_w, std::size_t n, double sigma_k_sq,
                                        NeighborhoodKernel kernel = NeighborhoodKernel::gaussian) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto dist = static_cast<double>(cyclic_distance(i, i_w, n));
    out[i] = kernel == NeighborhoodKernel::gaussian
                 ? std::exp(-dist * dist / (2.0 * sigma_k_sq))
                 : std::exp(-dist / std::sqrt(sigma_k_sq));
  }
  return out;
}

inline void update_inplace(KohonenMap& map, std::span<const double> o, std::size_t i_w,
                           const KohonenParams& params) {
  if (o.size() != map.dim()) throw ShapeError("observation length mismatch in SOM update");
  if (i_w >= map.size()) throw ShapeError("winner index out of range");
  const auto nb = neighborhood(i_w, map.size(), params.sigma_k_sq, params.kernel);
  const double lambda = params.lambda_k;
  for (std::size_t i = 0; i < map.size(); ++i) {
    auto row = map.filter(i);
    const double rate = lambda * nb[i];
    if (params.rule == UpdateRule::convex) {
      if (rate == 0.0) continue;
      for (std::size_t l = 0; l < row.size(); ++l)
        row[l] = map.clip((1.0 - rate) * row[l] + rate * o[l]);
    } else {
      for (std::size_t l = 0; l < row.size(); ++l)
        row[l] = map.clip((1.0 - lambda) * row[l] + rate * o[l]);
    }
  }
}

inline KohonenMap update(KohonenMap map, std::span<const double> o, std::size_t i_w,
                         const KohonenParams& params) {
  update_inplace(map, o, i_w, params);
  return map;
}

}  // namespace motorfep
