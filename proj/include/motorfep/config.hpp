#pragma once

// Run configuration: strict `key = value` text with dotted sections.
//
//   # comment
//   seed = 1
//   reservoir.n_r = 100
//   train.search_variance = 0:2, 0.625:2, 1:0.1
//
// Schedules are comma-separated `position:value` pairs where position is a
// fraction of train.episodes. Unknown keys and malformed values are errors.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "learner.hpp"

namespace motorfep {

/// Schedule breakpoints in fractions of the episode budget.
struct RelativeSchedule {
  std::vector<std::pair<double, double>> points;

  Schedule scaled(std::size_t episodes) const {
    auto pts = points;
    for (auto& [pos, v] : pts) pos *= static_cast<double>(episodes);
    return Schedule(std::move(pts));
  }

  friend bool operator==(const RelativeSchedule&, const RelativeSchedule&) = default;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t n = 10;

  ReservoirConfig reservoir;
  double arm_l1 = 0.5;
  double arm_l2 = 0.5;
  Vec2 arm_base{0.5, 0.0};
  double arm_gain = 0.01;

  double kohonen_lambda = 0.01;
  UpdateRule kohonen_rule = UpdateRule::convex;
  NeighborhoodKernel kohonen_kernel = NeighborhoodKernel::gaussian;
  RelativeSchedule kohonen_width{{{0.0, 10.0}, {kExplorationFraction, 2.0}}};

  double eps = kDefaultEps;

  std::size_t episodes = 3000;
  std::size_t episodes_per_primitive = 0;  // when > 0, overrides episodes as per_primitive * n
  double lambda = 0.01;
  double beta = 8.0;
  bool train_kohonen = true;
  StateDistance distance = StateDistance::cyclic;
  RelativeSchedule search_variance{{{0.0, 2.0}, {kExplorationFraction, 2.0}, {1.0, 0.1}}};
  std::size_t checkpoint_every = 0;

  std::size_t chain_M = 5;
  double chain_preference = 0.96;
  AmbiguitySign chain_sign = AmbiguitySign::plus;
  std::vector<std::string> letters = default_letters();
  std::string dataset;  // empty: synthetic corpus
  TrajectoryFormat dataset_format = TrajectoryFormat::positions;
  std::size_t synthetic_per_class = 70;

  std::size_t episode_budget(std::size_t size) const {
    return episodes_per_primitive > 0 ? episodes_per_primitive * size : episodes;
  }

  ArmConfig arm() const { return ArmConfig::centered(arm_l1, arm_l2, arm_base, arm_gain); }

  /// Learner setup for a repertoire of `size` primitives.
  LearnerSetup learner(std::size_t size) const {
    LearnerSetup s;
    s.n = size;
    s.reservoir = reservoir;
    s.reservoir.seed = seed;
    s.arm = arm();
    s.kohonen.lambda_k = kohonen_lambda;
    s.kohonen.rule = kohonen_rule;
    s.kohonen.kernel = kohonen_kernel;
    s.likelihood.eps = eps;
    const std::size_t E = episode_budget(size);
    s.train.episodes = E;
    s.train.lambda = lambda;
    s.train.beta = beta;
    s.train.train_kohonen = train_kohonen;
    s.train.distance = distance;
    s.train.search_variance = search_variance.scaled(E);
    s.train.kohonen_width = kohonen_width.scaled(E);
    s.seed = seed;
    return s;
  }

  LearnerSetup learner() const { return learner(n); }

  void validate() const {
    learner().validate();
    if (chain_M < 1) throw ConfigError("chain.M must be >= 1");
    if (!(chain_preference > 0.0 && chain_preference <= 1.0))
      throw ConfigError("chain.preference must lie in (0, 1]");
    if (letters.empty()) throw ConfigError("chain.letters must not be empty");
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline std::string format_schedule(const RelativeSchedule& s) {
  std::string out;
  for (const auto& [pos, v] : s.points) {
    if (!out.empty()) out += ", ";
    out += detail::format_double(pos) + ":" + detail::format_double(v);
  }
  return out;
}

/// Canonical text form: every key, fixed order, shortest round-trip numbers.
inline std::string to_text(const RunConfig& c) {
  using detail::format_double;
  std::ostringstream os;
  auto kv = [&](const char* key, const std::string& v) { os << key << " = " << v << '\n'; };
  kv("seed", std::to_string(c.seed));
  kv("n", std::to_string(c.n));
  kv("reservoir.n_r", std::to_string(c.reservoir.n_r));
  kv("reservoir.tau", format_double(c.reservoir.tau));
  kv("reservoir.p_r", format_double(c.reservoir.p_r));
  kv("reservoir.sigma_r_sq", format_double(c.reservoir.sigma_r_sq));
  kv("reservoir.n_o", std::to_string(c.reservoir.n_o));
  kv("reservoir.sigma_o_sq", format_double(c.reservoir.sigma_o_sq));
  kv("reservoir.T", std::to_string(c.reservoir.T));
  kv("arm.l1", format_double(c.arm_l1));
  kv("arm.l2", format_double(c.arm_l2));
  kv("arm.base_x", format_double(c.arm_base.x));
  kv("arm.base_y", format_double(c.arm_base.y));
  kv("arm.gain", format_double(c.arm_gain));
  kv("kohonen.lambda", format_double(c.kohonen_lambda));
  kv("kohonen.update_rule", c.kohonen_rule == UpdateRule::convex ? "convex" : "literal");
  kv("kohonen.kernel", c.kohonen_kernel == NeighborhoodKernel::gaussian ? "gaussian" : "laplacian");
  kv("kohonen.width", format_schedule(c.kohonen_width));
  kv("likelihood.eps", format_double(c.eps));
  kv("train.episodes", std::to_string(c.episodes));
  kv("train.episodes_per_primitive", std::to_string(c.episodes_per_primitive));
  kv("train.lambda", format_double(c.lambda));
  kv("train.beta", format_double(c.beta));
  kv("train.train_kohonen", c.train_kohonen ? "true" : "false");
  kv("train.distance", c.distance == StateDistance::cyclic ? "cyclic" : "linear");
  kv("train.search_variance", format_schedule(c.search_variance));
  kv("train.checkpoint_every", std::to_string(c.checkpoint_every));
  kv("chain.M", std::to_string(c.chain_M));
  kv("chain.preference", format_double(c.chain_preference));
  kv("chain.ambiguity_sign", c.chain_sign == AmbiguitySign::plus ? "plus" : "minus");
  std::string letters;
  for (const auto& l : c.letters) letters += (letters.empty() ? "" : ",") + l;
  kv("chain.letters", letters);
  kv("data.trajectories", c.dataset);
  kv("data.format", c.dataset_format == TrajectoryFormat::positions ? "positions" : "velocities");
  kv("data.synthetic_per_class", std::to_string(c.synthetic_per_class));
  return os.str();
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hex digest of the canonical config text; stamped on every output file.
inline std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_text(c))));
  return buf;
}

namespace detail {

template <typename T>
T parse_number(std::size_t line, std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ParseError(line, "invalid value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

inline RelativeSchedule parse_schedule(std::size_t line, std::string_view key, std::string_view v) {
  RelativeSchedule s;
  for (const auto& item : split(v, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ParseError(line, "schedule entries must be position:value in " + std::string(key));
    s.points.emplace_back(parse_number<double>(line, key, trim(std::string_view(item).substr(0, colon))),
                          parse_number<double>(line, key, trim(std::string_view(item).substr(colon + 1))));
  }
  return s;
}

template <typename E>
E parse_choice(std::size_t line, std::string_view key, std::string_view v,
               std::initializer_list<std::pair<std::string_view, E>> choices) {
  for (const auto& [name, value] : choices)
    if (v == name) return value;
  std::string names;
  for (const auto& [name, value] : choices) names += (names.empty() ? "" : "|") + std::string(name);
  throw ParseError(line, std::string(key) + " must be one of " + names);
}

}  // namespace detail

/// Applies one `key = value` entry; throws ConfigError/ParseError on bad input.
inline void apply_setting(RunConfig& c, std::string_view key, std::string_view v,
                          std::size_t line = 0) {
  using detail::parse_number;
  const std::map<std::string_view, std::function<void()>> setters{
      {"seed", [&] { c.seed = parse_number<std::uint64_t>(line, key, v); }},
      {"n", [&] { c.n = parse_number<std::size_t>(line, key, v); }},
      {"reservoir.n_r", [&] { c.reservoir.n_r = parse_number<std::size_t>(line, key, v); }},
      {"reservoir.tau", [&] { c.reservoir.tau = parse_number<double>(line, key, v); }},
      {"reservoir.p_r", [&] { c.reservoir.p_r = parse_number<double>(line, key, v); }},
      {"reservoir.sigma_r_sq", [&] { c.reservoir.sigma_r_sq = parse_number<double>(line, key, v); }},
      {"reservoir.n_o", [&] { c.reservoir.n_o = parse_number<std::size_t>(line, key, v); }},
      {"reservoir.sigma_o_sq", [&] { c.reservoir.sigma_o_sq = parse_number<double>(line, key, v); }},
      {"reservoir.T", [&] { c.reservoir.T = parse_number<std::size_t>(line, key, v); }},
      {"arm.l1", [&] { c.arm_l1 = parse_number<double>(line, key, v); }},
      {"arm.l2", [&] { c.arm_l2 = parse_number<double>(line, key, v); }},
      {"arm.base_x", [&] { c.arm_base.x = parse_number<double>(line, key, v); }},
      {"arm.base_y", [&] { c.arm_base.y = parse_number<double>(line, key, v); }},
      {"arm.gain", [&] { c.arm_gain = parse_number<double>(line, key, v); }},
      {"kohonen.lambda", [&] { c.kohonen_lambda = parse_number<double>(line, key, v); }},
      {"kohonen.update_rule",
       [&] {
         c.kohonen_rule = detail::parse_choice<UpdateRule>(
             line, key, v, {{"convex", UpdateRule::convex}, {"literal", UpdateRule::literal}});
       }},
      {"kohonen.kernel",
       [&] {
         c.kohonen_kernel = detail::parse_choice<NeighborhoodKernel>(
             line, key, v,
             {{"gaussian", NeighborhoodKernel::gaussian}, {"laplacian", NeighborhoodKernel::laplacian}});
       }},
      {"kohonen.width", [&] { c.kohonen_width = detail::parse_schedule(line, key, v); }},
      {"likelihood.eps", [&] { c.eps = parse_number<double>(line, key, v); }},
      {"train.episodes", [&] { c.episodes = parse_number<std::size_t>(line, key, v); }},
      {"train.episodes_per_primitive",
       [&] { c.episodes_per_primitive = parse_number<std::size_t>(line, key, v); }},
      {"train.lambda", [&] { c.lambda = parse_number<double>(line, key, v); }},
      {"train.beta", [&] { c.beta = parse_number<double>(line, key, v); }},
      {"train.train_kohonen",
       [&] { c.train_kohonen = detail::parse_choice<bool>(line, key, v, {{"true", true}, {"false", false}}); }},
      {"train.distance",
       [&] {
         c.distance = detail::parse_choice<StateDistance>(
             line, key, v, {{"cyclic", StateDistance::cyclic}, {"linear", StateDistance::linear}});
       }},
      {"train.search_variance", [&] { c.search_variance = detail::parse_schedule(line, key, v); }},
      {"train.checkpoint_every", [&] { c.checkpoint_every = parse_number<std::size_t>(line, key, v); }},
      {"chain.M", [&] { c.chain_M = parse_number<std::size_t>(line, key, v); }},
      {"chain.preference", [&] { c.chain_preference = parse_number<double>(line, key, v); }},
      {"chain.ambiguity_sign",
       [&] {
         c.chain_sign = detail::parse_choice<AmbiguitySign>(
             line, key, v, {{"plus", AmbiguitySign::plus}, {"minus", AmbiguitySign::minus}});
       }},
      {"chain.letters", [&] { c.letters = detail::split(v, ','); }},
      {"data.trajectories", [&] { c.dataset = std::string(v); }},
      {"data.format",
       [&] {
         c.dataset_format = detail::parse_choice<TrajectoryFormat>(
             line, key, v,
             {{"positions", TrajectoryFormat::positions}, {"velocities", TrajectoryFormat::velocities}});
       }},
      {"data.synthetic_per_class", [&] { c.synthetic_per_class = parse_number<std::size_t>(line, key, v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  it->second();
}

inline RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected 'key = value'");
    apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), lineno);
  }
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Class filters from the configured trajectory file, or the synthetic corpus.
inline ClassFilterSet class_filters_for(const RunConfig& c) {
  const auto corpus = c.dataset.empty()
                          ? synthesize_letters(c.letters, c.synthetic_per_class, c.seed)
                          : load_trajectories(c.dataset, c.dataset_format);
  return build_class_filters(corpus, c.letters, c.eps);
}

}  // namespace motorfep
