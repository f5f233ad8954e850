#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"

using namespace motorfep;

namespace {

// Small, fast setup for behavioural checks of the training loop.
LearnerSetup tiny_setup(std::size_t episodes) {
  LearnerSetup s;
  s.n = 4;
  s.reservoir.n_r = 20;
  s.reservoir.T = 30;
  s.train.episodes = episodes;
  s.train.search_variance = default_search_schedule(episodes);
  s.train.kohonen_width = default_kohonen_schedule(episodes);
  s.seed = 3;
  s.reservoir.seed = 3;
  return s;
}

LearnerSetup desk_setup(double beta, std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.beta = beta;
  return cfg.learner();
}

}  // namespace

TEST(Schedule, ConstantSingleBreakpoint) {
  const Schedule s({{0.0, 3.5}});
  for (double e : {-5.0, 0.0, 10.0, 1e6}) EXPECT_EQ(s(e), 3.5);
}

TEST(Schedule, MidpointInterpolation) {
  EXPECT_EQ(Schedule({{0.0, 4.0}, {100.0, 2.0}})(50.0), 3.0);
}

TEST(Schedule, EmptyOrUnsortedRejected) {
  EXPECT_THROW(Schedule(std::vector<std::pair<double, double>>{}), ConfigError);
  EXPECT_THROW(Schedule({{10.0, 1.0}, {5.0, 2.0}}), ConfigError);
}

TEST(Schedule, DefaultsContinuousAndNonIncreasing) {
  const auto search = default_search_schedule(20000);
  const auto width = default_kohonen_schedule(20000);
  EXPECT_EQ(search(0), 2.0);
  EXPECT_EQ(search(12499), 2.0);
  EXPECT_NEAR(search(20000), 0.1, 1e-15);
  EXPECT_NEAR(width(12500), 2.0, 1e-15);
  EXPECT_EQ(width(20000), 2.0);
  EXPECT_EQ(width(0), 10.0);
  double prev_s = search(0), prev_w = width(0);
  for (int e = 1; e <= 20000; ++e) {
    const double s = search(e), w = width(e);
    ASSERT_LE(s, prev_s);
    ASSERT_LE(w, prev_w);
    // Largest one-episode jump of a linear ramp is its slope.
    ASSERT_LE(prev_s - s, 1.9 / 7500 + 1e-12);
    ASSERT_LE(prev_w - w, 8.0 / 12500 + 1e-12);
    prev_s = s;
    prev_w = w;
  }
}

TEST(AntitheticUpdate, EqualValuesLeaveSignalUnchanged) {
  std::vector<double> x{1.0, -2.0, 3.0};
  const auto before = x;
  antithetic_update(x, 5.0, 5.0, std::vector<double>{0.3, 0.1, -0.2}, 0.01);
  EXPECT_EQ(x, before);
}

TEST(AntitheticUpdate, ZeroPerturbationLeavesSignalUnchanged) {
  std::vector<double> x{1.0, -2.0, 3.0};
  const auto before = x;
  antithetic_update(x, 100.0, -50.0, std::vector<double>(3, 0.0), 0.01);
  EXPECT_EQ(x, before);
}

TEST(AntitheticUpdate, ScalarExample) {
  std::vector<double> x{1.0, 1.0};
  antithetic_update(x, 10.0, 6.0, std::vector<double>{1.0, 0.0}, 0.01);
  EXPECT_NEAR(x[0], 1.0 - 0.04, 1e-15);
  EXPECT_EQ(x[1], 1.0);
}

TEST(AntitheticUpdateProperty, SymmetryAndScale) {
  for (int c = 0; c < 500; ++c) {
    Rng rng(60000 + c);
    const std::size_t d = 1 + rng.index(30);
    const auto x0 = gen::normal_vector(rng, d);
    const auto dx = gen::normal_vector(rng, d, rng.uniform(0.01, 2.0));
    std::vector<double> neg(dx);
    for (auto& v : neg) v = -v;
    const double fp = rng.normal(0, 100), fm = rng.normal(0, 100), lambda = rng.uniform(1e-4, 0.1);
    auto a = x0, b = x0;
    antithetic_update(a, fp, fm, dx, lambda);
    antithetic_update(b, fm, fp, neg, lambda);
    ASSERT_EQ(a, b) << "case " << c;
    double step = 0.0, norm_dx = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      step += (a[i] - x0[i]) * (a[i] - x0[i]);
      norm_dx += dx[i] * dx[i];
    }
    ASSERT_NEAR(std::sqrt(step), lambda * std::abs(fp - fm) * std::sqrt(norm_dx),
                1e-12 * (1.0 + std::sqrt(step)))
        << "case " << c;
  }
}

// On f(x) = |x|^2 the antithetic rule is a stochastic descent method.
TEST(AntitheticUpdateProperty, ExpectedDescentOnQuadratic) {
  int improved = 0;
  for (int c = 0; c < 100; ++c) {
    Rng rng(70000 + c);
    auto f = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x * x;
      return s;
    };
    auto x = gen::normal_vector(rng, 10);
    const double start = f(x);
    for (int e = 0; e < 200; ++e) {
      const auto dx = gen::normal_vector(rng, 10, 0.5);
      auto plus = x, minus = x;
      for (std::size_t i = 0; i < x.size(); ++i) {
        plus[i] += dx[i];
        minus[i] -= dx[i];
      }
      antithetic_update(x, f(plus), f(minus), dx, 0.01);
    }
    improved += f(x) < start;
  }
  EXPECT_GE(improved, 95);
}

TEST(Train, ZeroEpisodesKeepsRandomInitialization) {
  const auto setup = tiny_setup(0);
  const auto res = train(setup);
  EXPECT_TRUE(res.log.empty());
  EXPECT_EQ(res.repertoire, random_repertoire(setup.n, setup.reservoir, setup.seed, setup.arm));
  EXPECT_EQ(res.map, initial_map(setup));
  // x_k ~ N(0, 1)
  const auto big = random_repertoire(100, ReservoirConfig{}, 9);
  double mean = 0.0, sq = 0.0;
  for (const auto& x : big.signals)
    for (double v : x) {
      mean += v;
      sq += v * v;
    }
  mean /= 1e4;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sq / 1e4 - mean * mean, 1.0, 0.06);
}

TEST(Train, LogIsDeterministic) {
  const auto setup = tiny_setup(60);
  const auto a = train(setup), b = train(setup);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.repertoire, b.repertoire);
  EXPECT_EQ(a.map, b.map);
}

// Episode contract: F from the map as it was before this episode's SOM update,
// x moved by the antithetic rule, map then updated with both observations.
TEST(TrainEpisode, FollowsDeclaredOrder) {
  const auto setup = tiny_setup(10);
  const auto w = init_weights(setup.reservoir);
  auto rep = random_repertoire(setup.n, setup.reservoir, setup.seed, setup.arm);
  auto map = initial_map(setup);
  const auto rep0 = rep;
  const auto map0 = map;

  Rng rng(99);
  Rng mirror(99);
  const auto rec = train_episode(rep, map, w, setup, 0, rng);

  const std::size_t k = mirror.index(setup.n);
  ASSERT_EQ(rec.k, k);
  const double sd = std::sqrt(setup.train.search_variance(0.0));
  std::vector<double> dx(setup.reservoir.n_r);
  for (auto& v : dx) v = mirror.normal(0.0, sd);
  auto plus = rep0.signals[k], minus = rep0.signals[k];
  for (std::size_t i = 0; i < dx.size(); ++i) {
    plus[i] += dx[i];
    minus[i] -= dx[i];
  }
  const auto op = rollout(plus, w, setup.reservoir, setup.arm);
  const auto om = rollout(minus, w, setup.reservoir, setup.arm);
  const auto fp = free_energy_f1(op.view(), map0, k, setup.train.beta);
  const auto fm = free_energy_f1(om.view(), map0, k, setup.train.beta);
  EXPECT_EQ(rec.f_plus, fp.total);
  EXPECT_EQ(rec.f_minus, fm.total);
  EXPECT_EQ(rec.i_w, fp.winner);

  auto x = rep0.signals[k];
  antithetic_update(x, fp.total, fm.total, dx, setup.train.lambda);
  EXPECT_EQ(rep.signals[k], x);
  for (std::size_t j = 0; j < setup.n; ++j) {
    if (j != k) {
      EXPECT_EQ(rep.signals[j], rep0.signals[j]);
    }
  }

  auto expected = map0;
  KohonenParams kp = setup.kohonen;
  kp.sigma_k_sq = setup.train.kohonen_width(0.0);
  update_inplace(expected, op.view(), winner(expected, op.view()), kp);
  update_inplace(expected, om.view(), winner(expected, om.view()), kp);
  EXPECT_EQ(map, expected);
}

TEST(TrainEpisode, FrozenMapWhenKohonenTrainingDisabled) {
  auto setup = tiny_setup(20);
  setup.train.train_kohonen = false;
  const auto res = train(setup);
  EXPECT_EQ(res.map, initial_map(setup));
}

// Binomial(20000, 1/50): mean 400, sd 19.8; P(min < 300) is about 1e-5 over 50 cells.
TEST(Train, VisitCountsConcentrateNearFourHundred) {
  LearnerSetup s;
  s.n = 50;
  s.reservoir.n_r = 4;
  s.reservoir.T = 1;
  s.train.episodes = 20000;
  s.train.train_kohonen = false;
  s.seed = 5;
  std::vector<int> visits(50, 0);
  TrainHooks hooks;
  hooks.on_episode = [&](const EpisodeRecord& r) { ++visits[r.k]; };
  train(s, hooks);
  EXPECT_GE(*std::min_element(visits.begin(), visits.end()), 300);
  EXPECT_LE(*std::max_element(visits.begin(), visits.end()), 500);
}

TEST(Train, CheckpointHookFires) {
  auto setup = tiny_setup(10);
  std::vector<std::size_t> at;
  TrainHooks hooks;
  hooks.checkpoint_every = 4;
  hooks.on_checkpoint = [&](std::size_t e, const Repertoire&, const KohonenMap&) { at.push_back(e); };
  train(setup, hooks);
  EXPECT_EQ(at, (std::vector<std::size_t>{4, 8}));
}

TEST(Train, InvalidSetupRejected) {
  auto s = tiny_setup(10);
  s.reservoir.n_o = 3;
  EXPECT_THROW(train(s), ConfigError);
  s = tiny_setup(10);
  s.train.beta = 0.0;
  EXPECT_THROW(train(s), ConfigError);
}

TEST(Train, DeskRunReducesComplexity) {
  const auto res = train(desk_setup(8.0, 1));
  ASSERT_EQ(res.log.size(), 3000u);
  double first = 0.0, last = 0.0;
  for (std::size_t e = 0; e < 300; ++e) {
    first += res.log[e].complexity;
    last += res.log[2700 + e].complexity;
  }
  EXPECT_LT(last, first);
}

// With a practically flat prior the winners carry no information about k.
// Mean cyclic distance of a uniform random index on a ring of 10 is 2.5.
TEST(BetaSweep, FlatPriorGivesChanceLevelDistance) {
  const std::vector<double> betas{1e-8};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto rows = beta_sweep(betas, desk_setup(1e-8, 1), seeds);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].mean_distance, 2.5, 1.0);
}

// Four primitives, where chance level is a mean distance of 1.
TEST(BetaSweep, VeryLargeBetaMapsPrimitivesOntoTheirUnits) {
  RunConfig cfg;
  cfg.n = 4;
  cfg.episodes = 1000;
  const std::vector<double> betas{64.0};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto rows = beta_sweep(betas, cfg.learner(), seeds);
  EXPECT_LE(rows[0].mean_distance, 0.5);
}

TEST(BetaSweep, RowCountAndValidation) {
  const std::vector<std::uint64_t> seeds{1};
  auto setup = tiny_setup(5);
  const std::vector<double> six{1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0};
  EXPECT_EQ(beta_sweep(six, setup, seeds).size(), 6u);
  EXPECT_THROW(beta_sweep(std::span<const double>{}, setup, seeds), ConfigError);
}
