#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "generators.hpp"

using namespace motorfep;
namespace fs = std::filesystem;

namespace {

std::string g_cli;  // path of the motorfep executable, from argv

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("motorfep_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RepertoireFile small_file(bool with_map) {
  RunConfig cfg;
  cfg.n = 3;
  cfg.episodes = 5;
  cfg.reservoir.T = 20;
  const auto res = train(cfg.learner());
  RepertoireFile f;
  f.config = cfg;
  f.weights = res.weights;
  f.repertoire = res.repertoire;
  if (with_map) {
    f.map = res.map;
    f.filters = class_filters_for(cfg);
  }
  return f;
}

}  // namespace

TEST(Config, TextRoundTrip) {
  RunConfig c;
  c.seed = 42;
  c.beta = 0.125;
  c.kohonen_rule = UpdateRule::literal;
  c.search_variance = RelativeSchedule{{{0.0, 1.5}, {0.5, 0.25}}};
  c.letters = {"c", "s"};
  EXPECT_EQ(parse_config(to_text(c)), c);
  EXPECT_EQ(parse_config(to_text(RunConfig{})), RunConfig{});
}

TEST(Config, UnknownKeyAndBadValuesRejected) {
  EXPECT_THROW(parse_config(std::string("reservoir.nr = 100\n")), ConfigError);
  EXPECT_THROW(parse_config(std::string("train.beta = fast\n")), ParseError);
  EXPECT_THROW(parse_config(std::string("kohonen.update_rule = sideways\n")), ParseError);
  EXPECT_THROW(parse_config(std::string("just words\n")), ParseError);
}

TEST(Config, CommentsAndWhitespaceIgnored) {
  const auto c = parse_config(std::string("# comment\n\n  reservoir.n_r=50  \nchain.letters = c, s\n"));
  EXPECT_EQ(c.reservoir.n_r, 50u);
  EXPECT_EQ(c.letters, (std::vector<std::string>{"c", "s"}));
}

TEST(Config, HashTracksEveryChange) {
  RunConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.reservoir.tau = 10.5;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, SchedulesScaleWithEpisodeBudget) {
  RunConfig c;
  c.episodes = 1000;
  const auto s = c.learner();
  EXPECT_EQ(s.train.search_variance(0.0), 2.0);
  EXPECT_EQ(s.train.search_variance(625.0), 2.0);
  EXPECT_NEAR(s.train.search_variance(1000.0), 0.1, 1e-15);
  EXPECT_EQ(s.train.kohonen_width(625.0), 2.0);
  c.episodes_per_primitive = 300;
  EXPECT_EQ(c.learner(20).train.episodes, 6000u);
}

TEST(RepertoireFile, RoundTripIsBitwise) {
  for (bool with_map : {false, true}) {
    const auto f = small_file(with_map);
    const auto bytes = serialize(f);
    const auto back = deserialize(bytes);
    EXPECT_EQ(back, f);
    EXPECT_EQ(serialize(back), bytes);
  }
}

TEST(RepertoireFile, CorruptionDetected) {
  const auto bytes = serialize(small_file(true));
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  EXPECT_THROW(deserialize(flipped), IoError);
  EXPECT_THROW(deserialize(bytes.substr(0, bytes.size() - 3)), IoError);
  EXPECT_THROW(deserialize("MOTORFEP"), IoError);
  EXPECT_THROW(load_repertoire("/nonexistent/file.bin"), IoError);
}

TEST(RepertoireFile, HeaderLayout) {
  const auto bytes = serialize(small_file(false));
  EXPECT_EQ(bytes.substr(0, 8), "MOTORFEP");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);  // version, little-endian
  EXPECT_EQ(bytes.substr(16, 4), "CONF");
}

TEST(RepertoireFile, DumpListsSections) {
  std::ostringstream os;
  dump(os, small_file(true));
  const auto text = os.str();
  for (const char* needle : {"# config", "# recurrent weights", "# readout weights", "# activation signals: 3",
                             "# kohonen map: 3", "# class filters: 5"})
    EXPECT_NE(text.find(needle), std::string::npos) << needle;
}

TEST(Pgm, CanvasAndStripEncoding) {
  Canvas c;
  c.mark(0, 1);
  std::ostringstream os;
  write_pgm(os, canvas_image(c));
  const auto s = os.str();
  ASSERT_EQ(s.size(), std::string("P5\n64 64\n255\n").size() + 4096);
  EXPECT_EQ(s.substr(0, 13), "P5\n64 64\n255\n");
  EXPECT_EQ(static_cast<unsigned char>(s[13]), 0u);
  EXPECT_EQ(static_cast<unsigned char>(s[14]), 255u);

  KohonenMap m(3, kPixels);
  m.set_filter(1, std::vector<double>(kPixels, 0.2));
  const auto strip = filter_strip(3, [&](std::size_t i) { return m.filter(i); });
  EXPECT_EQ(strip.width, 192u);
  EXPECT_EQ(strip.height, 64u);
  EXPECT_EQ(strip.pixels[64], 51);    // lround(255 * 0.2)
  EXPECT_EQ(strip.pixels[0], 128);    // lround(255 * 0.5)
}

TEST(Csv, HeadersCarryConfigHash) {
  std::ostringstream log, cmp, sweep;
  write_train_log(log, std::vector<EpisodeRecord>{{}}, "abc");
  EXPECT_EQ(log.str().substr(0, 19), "# config_hash=abc\ne");
  EXPECT_NE(log.str().find("episode,k,f_plus,f_minus,complexity,inaccuracy,i_w,sigma_search,sigma_kohonen\n"),
            std::string::npos);
  write_comparison(cmp, std::vector<ComparisonRow>{{10, RepertoireKind::random, "c", 3, 1.5}}, "h");
  EXPECT_EQ(cmp.str(), "# config_hash=h\nsize,type,letter,seed,final_complexity\n10,random,c,3,1.5\n");
  write_beta_sweep(sweep, std::vector<BetaSweepRow>{{0.5, 2.25, {}}}, "h");
  EXPECT_EQ(sweep.str(), "# config_hash=h\nbeta,mean_distance\n0.5,2.25\n");
}

TEST(Cli, TrainIsByteReproducibleAndChainRuns) {
  const auto a = scratch("train_a"), b = scratch("train_b");
  const std::string args = "train --seed 4 --set n=4 --set train.episodes=40 --set reservoir.T=30 --out ";
  ASSERT_EQ(run_cli(args + a.string()), 0);
  ASSERT_EQ(run_cli(args + b.string()), 0);
  for (const char* f : {"repertoire.bin", "train_log.csv", "filters.pgm"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_EQ(slurp(a / "train_log.csv").rfind("# config_hash=", 0), 0u);

  const auto rep = (a / "repertoire.bin").string();
  EXPECT_EQ(run_cli("chain --repertoire " + rep + " --letter s -M 5 --out " + a.string()), 0);
  EXPECT_TRUE(fs::exists(a / "chain_s.pgm"));
  EXPECT_EQ(run_cli("chain --repertoire " + rep + " --letter s -M 0 --out " + b.string()), 0);
  EXPECT_EQ(run_cli("chain --repertoire " + rep + " --letter z --out " + b.string()), 1);
  EXPECT_EQ(run_cli("chain --repertoire " + (a / "missing.bin").string() + " --letter s"), 3);
  EXPECT_EQ(run_cli("dump --repertoire " + rep), 0);
  EXPECT_EQ(run_cli("render-filters --repertoire " + rep + " --out " + b.string()), 0);
  EXPECT_TRUE(fs::exists(b / "kohonen_filters.pgm"));
  EXPECT_TRUE(fs::exists(b / "class_filters.pgm"));
}

TEST(Cli, ZeroEpisodesStoresInitialization) {
  const auto d = scratch("e0");
  ASSERT_EQ(run_cli("train --seed 2 --set n=3 --set train.episodes=0 --out " + d.string()), 0);
  const auto f = load_repertoire((d / "repertoire.bin").string());
  RunConfig cfg;
  cfg.seed = 2;
  cfg.n = 3;
  cfg.episodes = 0;
  const auto setup = cfg.learner();
  EXPECT_EQ(f.repertoire.signals, random_repertoire(3, setup.reservoir, 2).signals);
  EXPECT_EQ(f.weights, init_weights(setup.reservoir));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("train --set no.such.key=1"), 2);
  EXPECT_EQ(run_cli("train --set train.beta=-1"), 2);
  EXPECT_EQ(run_cli("compare --repertoire-dir /nonexistent --sizes 3"), 3);
}

TEST(Cli, CompareRowCountsAndReproducibility) {
  const auto a = scratch("cmp_a"), b = scratch("cmp_b");
  const std::string args =
      "compare --sizes 3 --repeats 2 --letters c,s --set train.episodes=20 --set reservoir.T=30 --out ";
  ASSERT_EQ(run_cli(args + a.string()), 0);
  ASSERT_EQ(run_cli(args + b.string()), 0);
  const auto text = slurp(a / "comparison.csv");
  EXPECT_EQ(text, slurp(b / "comparison.csv"));
  std::istringstream in(text);
  std::string line;
  int learned = 0, random = 0;
  while (std::getline(in, line)) {
    learned += line.find(",learned,") != std::string::npos;
    random += line.find(",random,") != std::string::npos;
  }
  EXPECT_EQ(learned, 4);  // 1 size x 2 seeds x 2 letters
  EXPECT_EQ(random, 4);
}

TEST(Cli, CompareLoadsSavedRepertoires) {
  const auto d = scratch("cmp_dir");
  ASSERT_EQ(run_cli("train --seed 1 --set n=3 --set train.episodes=10 --out " + d.string()), 0);
  fs::rename(d / "repertoire.bin", d / "repertoire_n3_s1.bin");
  EXPECT_EQ(run_cli("compare --seed 1 --sizes 3 --letters c --repertoire-dir " + d.string() + " --out " +
                    d.string()),
            0);
  EXPECT_EQ(run_cli("compare --seed 1 --sizes 3 --repeats 2 --letters c --repertoire-dir " + d.string()), 3);
}

TEST(Cli, SweepBetaRows) {
  const auto d = scratch("sweep");
  ASSERT_EQ(run_cli("sweep-beta --betas 0.5 --set n=3 --set train.episodes=10 --out " + d.string()), 0);
  auto text = slurp(d / "beta_sweep.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  ASSERT_EQ(run_cli("sweep-beta --betas 0.03125,0.0625,0.125,0.25,0.5,1 --set n=3 --set train.episodes=5 "
                    "--set reservoir.T=10 --out " +
                    d.string()),
            0);
  text = slurp(d / "beta_sweep.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 8);
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc < 2) {
    std::cerr << "usage: test_cli <path-to-motorfep>\n";
    return 2;
  }
  g_cli = argv[1];
  return RUN_ALL_TESTS();
}
