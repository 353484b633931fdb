#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "s2gpt/greedy.hpp"

namespace s2gpt {

/// Held-out test set: a cell-centred grid over the (sub-)box, so no point
/// coincides with a training node.
struct TestSetConfig {
  std::size_t count = 100;
  /// Parameters whose fields are exported in full by `benchmark`.
  std::vector<std::vector<double>> figure_mu;
  /// Test points (from the start of the list) that also get a FOM reference
  /// when the problem has no exact solution.
  std::size_t fom_reference = 0;
};

/// One run: problem, grids, training set and every optimizer setting.
struct RunConfig {
  std::string pde;
  PdeOptions pde_options;
  GridResolution grid;
  std::vector<ParamRange> parameter_box;  // empty: the family's full box
  std::vector<std::size_t> train_counts;
  std::vector<bool> train_log;
  std::size_t n_basis = 8;
  std::uint64_t seed = 0;
  std::vector<int> layers;
  std::uint64_t network_seed = 0;
  FomConfig fom;
  OnlineConfig online;
  std::size_t threads = 1;
  std::string output_dir = "s2gpt_run";
  bool checkpoint = false;
  bool baseline = true;
  TestSetConfig test;
};

/// Defaults for a family; throws ConfigError for an unknown name.
RunConfig default_run_config(const std::string& pde);

/// Parses and validates a JSON document. Unknown keys, wrong types and
/// out-of-range values raise ConfigError; syntax errors report line and
/// column.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON echo with every default filled in.
std::string to_json(const RunConfig& config);

PdePtr make_pde(const RunConfig& config);
std::vector<std::vector<double>> training_set(const RunConfig& config, const PdeSpec& pde);
std::vector<std::vector<double>> test_set(const RunConfig& config, const PdeSpec& pde);
GreedyConfig greedy_config(const RunConfig& config);

std::string_view method_name(OnlineMethod m);

}  // namespace s2gpt
