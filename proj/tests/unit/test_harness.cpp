#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "s2gpt/errors.hpp"
#include "s2gpt/report.hpp"

using namespace s2gpt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string header(const fs::path& p) {
  const std::string s = slurp(p);
  return s.substr(0, s.find('\n'));
}

std::size_t lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

RunConfig tiny(const std::string& name) {
  RunConfig c = load_run_config(S2GPT_TEST_DATA "/tiny_burgers.json");
  c.output_dir = (fs::temp_directory_path() / ("s2gpt_harness_" + name)).string();
  fs::remove_all(c.output_dir);
  return c;
}

}  // namespace

TEST(Harness, OfflineWritesCompleteStore) {
  const RunConfig c = tiny("offline");
  const auto r = run_offline(c);
  const fs::path d = c.output_dir;
  const StoredRun s = load_store(d);
  EXPECT_EQ(s.artifact.snapshots.size(), 3u);
  EXPECT_EQ(sparse_set(s.artifact.basis).size(), 5u);
  EXPECT_EQ(s.trace.steps.size(), 3u);
  EXPECT_EQ(lines(d / "trace.csv"), 1 + 3 * 8u);  // widths 1..3 over 8 parameters
  EXPECT_EQ(header(d / "timing.csv"), "n,fom_seconds,offline_fom_seconds,sweep_width,sweep_seconds,offline_sweep_seconds");

  // Same config and seeds, single-threaded: identical trace.
  RunConfig again = c;
  again.output_dir += "_again";
  fs::remove_all(again.output_dir);
  run_offline(again);
  EXPECT_EQ(slurp(d / "trace.csv"), slurp(fs::path(again.output_dir) / "trace.csv"));
  fs::remove_all(again.output_dir);

  // Online at the first selected parameter recovers the stored snapshot
  // closely; the span-recovery tolerance itself is an acceptance check.
  const auto rows = run_online(d, {r.trace.steps[0].mu, {0.5}}, true, d / "online");
  ASSERT_EQ(rows.size(), 2u);
  ASSERT_TRUE(rows[0].vs_snapshot.has_value());
  EXPECT_LT(rows[0].vs_snapshot->rel_l2, 0.5);
  EXPECT_FALSE(rows[1].vs_snapshot.has_value());
  ASSERT_TRUE(rows[1].gpt.has_value());
  EXPECT_TRUE(fs::exists(d / "online/online.csv"));
  EXPECT_TRUE(fs::exists(d / "online/field_1.csv"));
  EXPECT_EQ(lines(d / "online/field_0.csv"), 1 + s.artifact.basis.grid_size);
  EXPECT_THROW(run_online(d, {{7.0}}, false, d / "online"), DomainError);
  fs::remove_all(d);
}

TEST(Harness, CheckpointLeavesLoadableStore) {
  RunConfig c = tiny("checkpoint");
  c.checkpoint = true;
  c.n_basis = 2;
  run_offline(c);
  EXPECT_EQ(load_store(c.output_dir).artifact.basis.size(), 2u);
  EXPECT_FALSE(fs::exists(c.output_dir + ".partial"));
  fs::remove_all(c.output_dir);
}

TEST(Harness, BenchmarkReportSchemas) {
  const RunConfig c = tiny("benchmark");
  const auto b = run_benchmark(c);
  const fs::path d = fs::path(c.output_dir) / "report";
  EXPECT_EQ(header(d / "loss_decay.csv"), "n,worst_sparse,mean_sparse,worst_full,mean_full,diverged");
  EXPECT_EQ(header(d / "selected.csv"), "n,train_index,nu,worst_delta,fom_loss,fom_seconds");
  EXPECT_EQ(header(d / "sparse_points.csv"), "order,kind,grid_index,x,t");
  EXPECT_EQ(header(d / "errors.csv"),
            "query,nu,reference,s2gpt_delta,s2gpt_full_loss,s2gpt_rel_l2,s2gpt_max_abs,gpt_loss,gpt_rel_l2,gpt_max_abs");
  EXPECT_EQ(header(d / "online_times.csv"),
            "query,s2gpt_seconds,s2gpt_cumulative,gpt_seconds,gpt_cumulative,s2gpt_epochs,gpt_epochs");
  EXPECT_EQ(header(d / "field_0.csv"), "x,t,s2gpt,gpt,fom,s2gpt_abs_error,gpt_abs_error");
  EXPECT_EQ(lines(d / "loss_decay.csv"), 4u);
  EXPECT_EQ(lines(d / "sparse_points.csv"), 6u);
  EXPECT_EQ(lines(d / "errors.csv"), 5u);
  EXPECT_EQ(b.test.size(), 4u);
  EXPECT_EQ(b.gpt_seconds.size(), 4u);
  // Only the first test point gets a FOM reference.
  const std::string errs = slurp(d / "errors.csv");
  EXPECT_NE(errs.find(",fom,"), std::string::npos);
  EXPECT_NE(errs.find(",none,"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "summary.json"));
  fs::remove_all(c.output_dir);
}

TEST(Harness, StandaloneFom) {
  RunConfig c = tiny("fom");
  c.pde = "helmholtz";
  c.grid = {8, 8, 0, 8};
  c.train_counts = {2, 2};
  c.parameter_box.clear();
  const fs::path d = fs::path(c.output_dir) / "fom";
  const Snapshot s = run_fom(c, {1.5, 2.0}, d);
  EXPECT_TRUE(std::isfinite(s.loss));
  EXPECT_EQ(header(d / "fom_field.csv"), "x,y,u,exact,abs_error");
  EXPECT_TRUE(fs::exists(d / "fom.json"));
  EXPECT_THROW(run_fom(c, {0.5, 2.0}, d), DomainError);
  fs::remove_all(c.output_dir);
}

TEST(Harness, InvalidConfigCreatesNothing) {
  const fs::path d = fs::temp_directory_path() / "s2gpt_harness_invalid";
  fs::remove_all(d);
  const std::string text = R"({"output_dir": ")" + d.string() + R"(", "n_basis": 3})";
  EXPECT_THROW(parse_run_config(text), ConfigError);
  EXPECT_FALSE(fs::exists(d));
}
