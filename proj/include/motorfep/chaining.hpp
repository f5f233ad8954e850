#pragma once

// Chaining primitives into longer drawings by active inference.
//
// Hidden states sigma are letter classes with Bernoulli class-mean filters.
// For every slot the agent rewinds a copy of the environment, imagines each
// primitive, classifies the imagined drawing into q_k(sigma), and executes
// the primitive with the lowest expected free energy
//
//   E[F2(k)] = KL(q_k || pi) + sign * sum_i q_k(i) H(p(o | sigma_i)).
//
// The environment is deterministic, so imagination is exact.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "canvas.hpp"
#include "errors.hpp"
#include "free_energy.hpp"
#include "learner.hpp"
#include "reservoir.hpp"

namespace motorfep {

class ClassFilterSet {
 public:
  ClassFilterSet() = default;

  /// Filters are clipped into [eps, 1 - eps]; entropies are cached.
  ClassFilterSet(std::vector<std::string> labels, std::vector<std::vector<double>> filters,
                 double eps = kDefaultEps)
      : labels_(std::move(labels)), filters_(std::move(filters)), eps_(eps) {
    if (labels_.size() != filters_.size()) throw ShapeError("one filter per label is required");
    if (labels_.empty()) throw ConfigError("class filter set is empty");
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("eps must lie in (0, 0.5)");
    for (auto& f : filters_) {
      if (f.size() != filters_.front().size()) throw ShapeError("class filters differ in length");
      for (auto& v : f) v = std::clamp(v, eps_, 1.0 - eps_);
      entropies_.push_back(bernoulli_entropy(f));
    }
  }

  std::size_t size() const { return labels_.size(); }
  double eps() const { return eps_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::span<const double> filter(std::size_t i) const { return filters_[i]; }
  std::span<const double> entropies() const { return entropies_; }

  std::size_t index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
      std::string known;
      for (const auto& l : labels_) known += (known.empty() ? "" : ", ") + l;
      throw ConfigError("unknown label '" + label + "' (available: " + known + ")");
    }
    return static_cast<std::size_t>(it - labels_.begin());
  }

  friend bool operator==(const ClassFilterSet&, const ClassFilterSet&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> filters_;
  std::vector<double> entropies_;
  double eps_ = kDefaultEps;
};

/// Posterior over classes under a uniform class prior: softmax of log-likelihoods.
inline Categorical classify(std::span<const double> o, const ClassFilterSet& filters) {
  const LikelihoodParams params{filters.eps()};
  std::vector<double> logl(filters.size());
  for (std::size_t i = 0; i < filters.size(); ++i)
    logl[i] = log_likelihood(o, filters.filter(i), params);
  return Categorical::softmax(logl);
}

/// `mass` on the target label, the rest spread evenly over the others.
inline Categorical letter_preferences(const ClassFilterSet& filters, const std::string& target,
                                      double mass = 0.96) {
  if (!(mass > 0.0 && mass <= 1.0)) throw ConfigError("preference mass must lie in (0, 1]");
  const std::size_t n = filters.size();
  const std::size_t t = filters.index_of(target);
  if (n == 1) return {{1.0}};
  std::vector<double> p(n, (1.0 - mass) / static_cast<double>(n - 1));
  p[t] = mass;
  return Categorical::from_weights(std::move(p));
}

struct ChainConfig {
  std::size_t M = 5;
  Categorical prior;
  AmbiguitySign sign = AmbiguitySign::plus;
};

struct Selection {
  std::size_t k = 0;
  std::vector<double> efe;         // one entry per primitive
  Observation predicted;           // imagined drawing of the chosen primitive
};

/// Score every primitive on a rewound copy of `snap`; ties go to the lowest index.
inline Selection select_primitive(const EnvSnapshot& snap, const Repertoire& rep,
                                  const ReservoirWeights& w, const ClassFilterSet& filters,
                                  const ChainConfig& cfg) {
  if (rep.size() == 0) throw ConfigError("cannot select from an empty repertoire");
  if (cfg.prior.size() != filters.size()) throw ShapeError("prior size differs from class count");
  Selection out;
  out.efe.resize(rep.size());
  double best = 0.0;
  for (std::size_t k = 0; k < rep.size(); ++k) {
    EnvState env = restore(snap);
    execute_primitive(env, rep.signals[k], w, rep.reservoir, rep.arm);
    Observation o = observe(env);
    const Categorical q = classify(o.view(), filters);
    out.efe[k] = expected_free_energy(q, cfg.prior, filters.entropies(), cfg.sign);
    if (k == 0 || out.efe[k] < best) {
      best = out.efe[k];
      out.k = k;
      out.predicted = std::move(o);
    }
  }
  return out;
}

struct ChainResult {
  std::vector<std::size_t> chosen;
  std::vector<std::vector<double>> efe_tables;
  std::vector<Observation> predicted;  // per slot, before execution
  std::vector<Observation> executed;   // per slot, after execution
  EnvState final_state;
  Categorical final_q;
  double final_complexity = 0.0;  // KL(final_q || prior)
};

/// Greedy slot-by-slot chaining; strokes and arm angles carry over between slots.
inline ChainResult chain(EnvState env, const Repertoire& rep, const ReservoirWeights& w,
                         const ClassFilterSet& filters, const ChainConfig& cfg) {
  ChainResult out;
  for (std::size_t m = 0; m < cfg.M; ++m) {
    Selection sel = select_primitive(snapshot(env), rep, w, filters, cfg);
    execute_primitive(env, rep.signals[sel.k], w, rep.reservoir, rep.arm);
    out.chosen.push_back(sel.k);
    out.efe_tables.push_back(std::move(sel.efe));
    out.predicted.push_back(std::move(sel.predicted));
    out.executed.push_back(observe(env));
  }
  const Observation final_o = observe(env);
  out.final_q = classify(final_o.view(), filters);
  out.final_complexity = kl_divergence(out.final_q, cfg.prior);
  out.final_state = std::move(env);
  return out;
}

enum class RepertoireKind { learned, random };

inline const char* to_string(RepertoireKind k) {
  return k == RepertoireKind::learned ? "learned" : "random";
}

/// One learned repertoire and its untrained counterpart on the same reservoir.
struct RepertoirePair {
  std::uint64_t seed = 0;
  ReservoirWeights weights;
  Repertoire learned;
  Repertoire random;
};

struct ComparisonRow {
  std::size_t size = 0;
  RepertoireKind kind = RepertoireKind::learned;
  std::string letter;
  std::uint64_t seed = 0;
  double final_complexity = 0.0;
};

inline std::vector<ComparisonRow> evaluate_repertoires(std::span<const RepertoirePair> pairs,
                                                       std::span<const std::string> letters,
                                                       const ClassFilterSet& filters,
                                                       std::size_t M, double mass = 0.96,
                                                       AmbiguitySign sign = AmbiguitySign::plus) {
  std::vector<ComparisonRow> rows;
  for (const auto& pair : pairs) {
    for (const auto kind : {RepertoireKind::learned, RepertoireKind::random}) {
      const Repertoire& rep = kind == RepertoireKind::learned ? pair.learned : pair.random;
      for (const auto& letter : letters) {
        const ChainConfig cfg{M, letter_preferences(filters, letter, mass), sign};
        const auto res = chain(EnvState::fresh(rep.arm), rep, pair.weights, filters, cfg);
        rows.push_back({rep.size(), kind, letter, pair.seed, res.final_complexity});
      }
    }
  }
  return rows;
}

/// Mean final complexity of the rows matching (size, kind); NaN if none match.
inline double mean_complexity(std::span<const ComparisonRow> rows, std::size_t size,
                              RepertoireKind kind) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& r : rows)
    if (r.size == size && r.kind == kind) {
      acc += r.final_complexity;
      ++count;
    }
  return count ? acc / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace motorfep
