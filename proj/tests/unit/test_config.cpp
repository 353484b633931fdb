#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "s2gpt/config.hpp"
#include "s2gpt/errors.hpp"

using namespace s2gpt;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsFromPdeName) {
  const auto c = parse_run_config(R"({"pde": "burgers"})");
  EXPECT_EQ(c.pde, "burgers");
  EXPECT_EQ(c.grid, (GridResolution{100, 100, 100, 50}));
  EXPECT_EQ(c.train_counts, (std::vector<std::size_t>{30}));
  EXPECT_EQ(c.n_basis, 10u);
  EXPECT_EQ(c.online.method, OnlineMethod::Lbfgs);
  EXPECT_TRUE(c.baseline);
  EXPECT_FALSE(c.checkpoint);
}

TEST(Config, Overrides) {
  const auto c = parse_run_config(R"({
    "pde": "allen_cahn",
    "grid": {"n0": 20, "n1": 10, "n_initial": 20, "n_boundary": 10},
    "train": {"counts": [4, 3], "log": [true, false]},
    "n_basis": 5, "seed": 7,
    "network": {"layers": [2, 10, 1], "seed": 3},
    "fom": {"epochs": 12, "weights": {"boundary": 4.0}},
    "online": {"method": "adam", "learning_rate": 0.005},
    "threads": 2, "output_dir": "out", "checkpoint": true, "baseline": false,
    "test": {"count": 9, "figure_mu": [[0.0005, 2.0]]}
  })");
  EXPECT_EQ(c.grid, (GridResolution{20, 10, 20, 10}));
  EXPECT_EQ(c.train_counts, (std::vector<std::size_t>{4, 3}));
  EXPECT_EQ(c.layers, (std::vector<int>{2, 10, 1}));
  EXPECT_EQ(c.network_seed, 3u);
  EXPECT_EQ(c.fom.lbfgs.epochs, 12u);
  EXPECT_EQ(c.fom.weights.boundary, 4.0);
  EXPECT_EQ(c.fom.weights.residual, 1.0);
  EXPECT_EQ(c.online.method, OnlineMethod::Adam);
  EXPECT_EQ(c.online.optim.learning_rate, 0.005);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_FALSE(c.baseline);

  const auto pde = make_pde(c);
  const auto train = training_set(c, *pde);
  ASSERT_EQ(train.size(), 12u);
  EXPECT_DOUBLE_EQ(train.front()[0], 1e-4);
  EXPECT_DOUBLE_EQ(train.back()[0], 1e-3);
}

TEST(Config, RoundTripThroughJson) {
  auto c = parse_run_config(R"({"pde": "helmholtz", "parameter_box": [[1.5, 2.0], [1.0, 4.0]]})");
  const std::string echo = to_json(c);
  EXPECT_EQ(to_json(parse_run_config(echo)), echo);
}

TEST(Config, Rejections) {
  EXPECT_NE(error_of("{}").find("missing required key 'pde'"), std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "heat"})").find("unknown pde"), std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "burgers", "colour": 1})").find("unknown key 'colour'"), std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "burgers", "fom": {"weights": {"bc": 1}}})").find("fom.weights.bc"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "burgers", "n_basis": "8"})").find("non-negative integer"), std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "burgers", "online": {"method": "sgd"}})").find("gd, adam, lbfgs"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "burgers", "train": {"counts": [3, 3]}})").find("one entry per parameter"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "burgers", "parameter_box": [[0.0, 1.0]]})").find("admissible"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "helmholtz", "grid": {"n_initial": 4}})").find("steady"), std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "burgers", "online": {"learning_rate": -1}})").find("positive"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"pde": "burgers", "test": {"figure_mu": [[7.0]]}})").find("figure_mu"),
            std::string::npos);
}

TEST(Config, SyntaxErrorReportsLineAndColumn) {
  const std::string msg = error_of("{\n  \"pde\": \"burgers\",\n  \"seed\": ,\n}");
  EXPECT_NE(msg.find("line 3, column 11"), std::string::npos) << msg;
}

TEST(Config, TestSetAvoidsTrainingNodes) {
  for (const auto& name : pde_names()) {
    auto c = default_run_config(name);
    const auto pde = make_pde(c);
    const auto train = training_set(c, *pde);
    const auto test = test_set(c, *pde);
    EXPECT_EQ(test.size(), 100u) << name;
    const std::set<std::vector<double>> t(train.begin(), train.end());
    for (const auto& mu : test) {
      EXPECT_FALSE(t.count(mu));
      EXPECT_TRUE(pde->contains(mu));
    }
  }
  auto c = default_run_config("burgers");
  c.parameter_box = {{"nu", 0.1, 1.0}};
  c.test.count = 20;
  const auto test = test_set(c, *make_pde(c));
  ASSERT_EQ(test.size(), 20u);
  EXPECT_DOUBLE_EQ(test.front()[0], 0.1 + 0.5 * 0.9 / 20);
}

TEST(Config, GreedyConfigCarriesSettings) {
  auto c = default_run_config("klein_gordon");
  c.threads = 4;
  const auto g = greedy_config(c);
  EXPECT_EQ(g.n_basis, 12u);
  EXPECT_EQ(g.net.layers, (std::vector<int>{2, 40, 40, 1}));
  EXPECT_EQ(g.threads, 4u);
}

TEST(Config, ShippedConfigsParse) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(S2GPT_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    const auto c = load_run_config(e.path());
    EXPECT_FALSE(training_set(c, *make_pde(c)).empty()) << e.path();
    ++n;
  }
  EXPECT_EQ(n, 6u);
}
