// motorfep: train, chain and compare motor-primitive repertoires.
//
// Exit codes: 0 success, 1 usage, 2 config, 3 I/O, 4 numeric failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "motorfep/motorfep.hpp"

namespace fs = std::filesystem;
using namespace motorfep;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kIo = 3, kNumeric = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string out = ".";
};

RunConfig load_run_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  for (std::size_t i = 0; i < c.overrides.size(); ++i) {
    const auto& kv = c.overrides[i];
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, detail::trim(std::string_view(kv).substr(0, eq)),
                  detail::trim(std::string_view(kv).substr(eq + 1)), 0);
  }
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + c.out + "'");
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

std::string repertoire_name(std::size_t size, std::uint64_t seed) {
  return "repertoire_n" + std::to_string(size) + "_s" + std::to_string(seed) + ".bin";
}

RepertoireFile train_to_file(const RunConfig& cfg, const TrainResult& res,
                             const ClassFilterSet& filters) {
  RepertoireFile f;
  f.config = cfg;
  f.weights = res.weights;
  f.repertoire = res.repertoire;
  f.map = res.map;
  f.filters = filters;
  return f;
}

int cmd_train(const Common& c) {
  const RunConfig cfg = load_run_config(c);
  const auto dir = out_dir(c);
  const auto hash = config_hash(cfg);
  const ClassFilterSet filters = class_filters_for(cfg);

  TrainHooks hooks;
  hooks.checkpoint_every = cfg.checkpoint_every;
  hooks.on_checkpoint = [&](std::size_t e, const Repertoire& rep, const KohonenMap& map) {
    std::cerr << "checkpoint at episode " << e << '\n';
    RepertoireFile f;
    f.config = cfg;
    f.weights = init_weights(cfg.learner().reservoir);
    f.repertoire = rep;
    f.map = map;
    f.filters = filters;
    save_repertoire((dir / ("checkpoint_" + std::to_string(e) + ".bin")).string(), f);
  };
  const auto res = train(cfg.learner(), hooks);

  save_repertoire((dir / "repertoire.bin").string(), train_to_file(cfg, res, filters));
  auto log = open_out(dir / "train_log.csv");
  write_train_log(log, res.log, hash);
  save_pgm((dir / "filters.pgm").string(),
           filter_strip(res.map.size(), [&](std::size_t i) { return res.map.filter(i); }));
  std::cout << "trained " << cfg.n << " primitives for " << res.log.size() << " episodes; "
            << "mean winner distance "
            << detail::format_double(mean_winner_distance(res.repertoire, res.map, res.weights))
            << "\nwrote " << (dir / "repertoire.bin").string() << '\n';
  return kOk;
}

int cmd_chain(const Common& c, const std::string& repertoire, const std::string& letter,
              std::optional<std::size_t> M) {
  RepertoireFile f = load_repertoire(repertoire);
  if (c.seed) f.config.seed = *c.seed;
  if (!f.filters) throw ConfigError("repertoire file carries no class filters");
  const auto& filters = *f.filters;
  const auto labels = filters.labels();
  if (std::find(labels.begin(), labels.end(), letter) == labels.end()) {
    std::string known;
    for (const auto& l : labels) known += (known.empty() ? "" : ", ") + l;
    throw UsageError("unknown letter '" + letter + "' (available: " + known + ")");
  }
  const auto dir = out_dir(c);
  const ChainConfig cc{M.value_or(f.config.chain_M),
                       letter_preferences(filters, letter, f.config.chain_preference),
                       f.config.chain_sign};
  const auto res = chain(EnvState::fresh(f.repertoire.arm), f.repertoire, f.weights, filters, cc);

  auto csv = open_out(dir / ("chain_" + letter + ".csv"));
  write_chain_result(csv, res, filters, config_hash(f.config));
  save_pgm((dir / ("chain_" + letter + ".pgm")).string(), canvas_image(res.final_state.canvas));
  std::cout << "final_complexity=" << detail::format_double(res.final_complexity) << '\n';
  return kOk;
}

int cmd_compare(const Common& c, std::vector<std::size_t> sizes, std::size_t repeats,
                std::vector<std::string> letters, const std::string& repertoire_dir) {
  const RunConfig cfg = load_run_config(c);
  if (sizes.empty()) sizes = {cfg.n};
  if (letters.empty()) letters = cfg.letters;
  if (repeats == 0) throw UsageError("--repeats must be >= 1");
  const ClassFilterSet filters = class_filters_for(cfg);
  for (const auto& l : letters) {
    const auto& ls = filters.labels();
    if (std::find(ls.begin(), ls.end(), l) == ls.end())
      throw UsageError("letter '" + l + "' has no class filter");
  }

  std::vector<ComparisonRow> rows;
  for (auto size : sizes) {
    for (std::size_t r = 0; r < repeats; ++r) {
      RunConfig run = cfg;
      run.n = size;
      run.seed = cfg.seed + r;
      RepertoirePair pair;
      pair.seed = run.seed;
      if (!repertoire_dir.empty()) {
        const auto f = load_repertoire((fs::path(repertoire_dir) / repertoire_name(size, run.seed)).string());
        if (f.repertoire.size() != size)
          throw ConfigError("repertoire file holds " + std::to_string(f.repertoire.size()) +
                            " primitives, expected " + std::to_string(size));
        pair.weights = f.weights;
        pair.learned = f.repertoire;
        run = f.config;
      } else {
        std::cerr << "training n=" << size << " seed=" << run.seed << '\n';
        const auto res = train(run.learner());
        pair.weights = res.weights;
        pair.learned = res.repertoire;
      }
      const auto setup = run.learner();
      pair.random = random_repertoire(size, setup.reservoir, setup.seed, setup.arm);
      const std::vector<RepertoirePair> one{pair};
      const auto part = evaluate_repertoires(one, letters, filters, cfg.chain_M,
                                             cfg.chain_preference, cfg.chain_sign);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  const auto dir = out_dir(c);
  auto csv = open_out(dir / "comparison.csv");
  write_comparison(csv, rows, config_hash(cfg));
  for (auto size : sizes)
    std::cout << "n=" << size << " learned="
              << detail::format_double(mean_complexity(rows, size, RepertoireKind::learned))
              << " random=" << detail::format_double(mean_complexity(rows, size, RepertoireKind::random))
              << '\n';
  return kOk;
}

int cmd_sweep_beta(const Common& c, std::vector<double> betas, std::size_t repeats) {
  const RunConfig cfg = load_run_config(c);
  if (betas.empty()) betas = {cfg.beta};
  if (repeats == 0) throw UsageError("--repeats must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (std::size_t r = 0; r < repeats; ++r) seeds.push_back(cfg.seed + r);
  const auto rows = beta_sweep(betas, cfg.learner(), seeds);
  const auto dir = out_dir(c);
  auto csv = open_out(dir / "beta_sweep.csv");
  write_beta_sweep(csv, rows, config_hash(cfg));
  for (const auto& r : rows)
    std::cout << "beta=" << detail::format_double(r.beta)
              << " mean_distance=" << detail::format_double(r.mean_distance) << '\n';
  return kOk;
}

int cmd_render_filters(const Common& c, const std::string& repertoire) {
  const auto dir = out_dir(c);
  if (!repertoire.empty()) {
    const RepertoireFile f = load_repertoire(repertoire);
    if (f.map)
      save_pgm((dir / "kohonen_filters.pgm").string(),
               filter_strip(f.map->size(), [&](std::size_t i) { return f.map->filter(i); }));
    if (f.filters)
      save_pgm((dir / "class_filters.pgm").string(),
               filter_strip(f.filters->size(), [&](std::size_t i) { return f.filters->filter(i); }));
    if (!f.map && !f.filters) throw ConfigError("repertoire file carries no filters");
  } else {
    const RunConfig cfg = load_run_config(c);
    const ClassFilterSet filters = class_filters_for(cfg);
    save_pgm((dir / "class_filters.pgm").string(),
             filter_strip(filters.size(), [&](std::size_t i) { return filters.filter(i); }));
  }
  return kOk;
}

int cmd_dump(const std::string& repertoire) {
  dump(std::cout, load_repertoire(repertoire));
  return kOk;
}

int cmd_synth_letters(const Common& c, std::size_t per_class) {
  const RunConfig cfg = load_run_config(c);
  const auto dir = out_dir(c);
  const auto trajs = synthesize_letters(cfg.letters, per_class ? per_class : cfg.synthetic_per_class, cfg.seed);
  auto out = open_out(dir / "letters.txt");
  write_trajectories(out, trajs);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn and chain drawing primitives by free-energy minimization"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_config = true) {
    if (with_config) {
      sub->add_option("--config", common.config_path, "key = value config file")->check(CLI::ExistingFile);
      sub->add_option("--set", common.overrides, "override a config key (key=value), repeatable");
    }
    sub->add_option("--seed", common.seed, "global seed");
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
  };

  auto* train_cmd = app.add_subcommand("train", "train a repertoire");
  add_common(train_cmd);

  std::string repertoire, letter;
  std::optional<std::size_t> M;
  auto* chain_cmd = app.add_subcommand("chain", "chain primitives toward a letter");
  add_common(chain_cmd, false);
  chain_cmd->add_option("--repertoire", repertoire, "repertoire file")->required();
  chain_cmd->add_option("--letter", letter, "target letter")->required();
  chain_cmd->add_option("-M", M, "number of primitives to chain");

  std::vector<std::size_t> sizes;
  std::size_t repeats = 1;
  std::vector<std::string> letters;
  std::string repertoire_dir;
  auto* compare_cmd = app.add_subcommand("compare", "learned versus random repertoires");
  add_common(compare_cmd);
  compare_cmd->add_option("--sizes", sizes, "repertoire sizes")->delimiter(',');
  compare_cmd->add_option("--repeats", repeats, "seeds per size")->capture_default_str();
  compare_cmd->add_option("--letters", letters, "target letters")->delimiter(',');
  compare_cmd->add_option("--repertoire-dir", repertoire_dir,
                          "load repertoire_n<size>_s<seed>.bin files instead of training");

  std::vector<double> betas;
  auto* sweep_cmd = app.add_subcommand("sweep-beta", "final winner distance per beta");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--betas", betas, "beta values")->delimiter(',');
  sweep_cmd->add_option("--repeats", repeats, "seeds per beta")->capture_default_str();

  auto* render_cmd = app.add_subcommand("render-filters", "export filters as PGM strips");
  add_common(render_cmd);
  render_cmd->add_option("--repertoire", repertoire, "repertoire file (default: class filters from config)");

  auto* dump_cmd = app.add_subcommand("dump", "print a repertoire file as text");
  dump_cmd->add_option("--repertoire", repertoire, "repertoire file")->required();

  std::size_t per_class = 0;
  auto* synth_cmd = app.add_subcommand("synth-letters", "write the synthetic letter corpus");
  add_common(synth_cmd);
  synth_cmd->add_option("--per-class", per_class, "trajectories per letter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(common);
    if (*chain_cmd) return cmd_chain(common, repertoire, letter, M);
    if (*compare_cmd) return cmd_compare(common, sizes, repeats, letters, repertoire_dir);
    if (*sweep_cmd) return cmd_sweep_beta(common, betas, repeats);
    if (*render_cmd) return cmd_render_filters(common, repertoire);
    if (*dump_cmd) return cmd_dump(repertoire);
    if (*synth_cmd) return cmd_synth_letters(common, per_class);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ShapeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}
