// Command line front end: offline / online / benchmark / fom.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "s2gpt/errors.hpp"
#include "s2gpt/report.hpp"

using namespace s2gpt;

namespace {

std::vector<double> parse_mu(const std::string& text) {
  std::vector<double> mu;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    std::stringstream one(item);
    double v;
    while (one >> v) mu.push_back(v);
    if (!one.eof()) throw ConfigError("cannot parse parameter value '" + item + "'");
  }
  if (mu.empty()) throw ConfigError("empty parameter list '" + text + "'");
  return mu;
}

// One parameter point per line; commas or whitespace separate values and
// '#' starts a comment.
std::vector<std::vector<double>> read_mu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::vector<std::vector<double>> out;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_mu(line));
  }
  return out;
}

RunConfig load(const std::string& path, const std::optional<std::uint64_t>& seed,
               const std::optional<std::string>& output) {
  RunConfig c = load_run_config(path);
  if (seed) c.seed = *seed;
  if (output) c.output_dir = *output;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse, self-adaptive reduced PINN solver for parametric PDEs"};
  app.require_subcommand(1);

  std::string config_path, store_path, mu_file;
  std::vector<std::string> mu_text;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  bool baseline = false;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  auto* offline = app.add_subcommand("offline", "Greedy offline stage; writes an artifact store");
  offline->add_option("config", config_path, "Run configuration (JSON)")->required();
  offline->add_option("--seed", seed, "Override the greedy seed");
  offline->add_option("-o,--output", output, "Override the output directory");

  auto* online = app.add_subcommand("online", "Online solves against a saved store");
  online->add_option("artifact", store_path, "Artifact store directory")->required();
  auto* mu_opt = online->add_option("--mu", mu_text, "Parameter point, comma separated (repeatable)");
  auto* file_opt = online->add_option("--mu-file", mu_file, "File with one parameter point per line");
  mu_opt->excludes(file_opt);
  online->add_flag("--baseline", baseline, "Also run the full-grid GPT baseline");
  online->add_option("-o,--output", output, "Directory for results (default <artifact>/online)");

  auto* bench = app.add_subcommand("benchmark", "Offline stage plus held-out report CSVs");
  bench->add_option("config", config_path, "Run configuration (JSON)")->required();
  bench->add_option("--seed", seed, "Override the greedy seed");
  bench->add_option("-o,--output", output, "Override the output directory");

  auto* fom = app.add_subcommand("fom", "Train one full PINN");
  fom->add_option("config", config_path, "Run configuration (JSON)")->required();
  fom->add_option("--mu", mu_text, "Parameter point, comma separated")->required();
  fom->add_option("--seed", seed, "Override the network seed");
  fom->add_option("-o,--output", output, "Output directory (default <output_dir>/fom)");

  CLI11_PARSE(app, argc, argv);
  std::ostream* log = quiet ? nullptr : &std::cerr;

  try {
    if (*offline) {
      run_offline(load(config_path, seed, output), log);
    } else if (*bench) {
      run_benchmark(load(config_path, seed, output), log);
    } else if (*online) {
      std::vector<std::vector<double>> mus;
      if (!mu_file.empty()) mus = read_mu_file(mu_file);
      for (const auto& m : mu_text) mus.push_back(parse_mu(m));
      if (mus.empty()) throw ConfigError("online needs --mu or --mu-file");
      const auto dir = output ? std::filesystem::path(*output) : std::filesystem::path(store_path) / "online";
      const auto rows = run_online(store_path, mus, baseline, dir, log);
      for (const auto& r : rows) {
        std::cout << "delta=" << r.s2gpt.loss << " seconds=" << r.s2gpt.seconds;
        if (r.vs_snapshot) std::cout << " snapshot_rel_l2=" << r.vs_snapshot->rel_l2;
        if (r.vs_exact) std::cout << " exact_rel_l2=" << r.vs_exact->rel_l2;
        if (r.gpt) std::cout << " gpt_seconds=" << r.gpt->seconds << " ratio=" << r.s2gpt.seconds / r.gpt->seconds;
        std::cout << "\n";
      }
    } else if (*fom) {
      RunConfig c = load(config_path, std::nullopt, std::nullopt);
      if (seed) c.network_seed = *seed;
      if (mu_text.size() != 1) throw ConfigError("fom takes exactly one --mu");
      const auto dir = output ? std::filesystem::path(*output) : std::filesystem::path(c.output_dir) / "fom";
      run_fom(c, parse_mu(mu_text.front()), dir, log);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 3;
  } catch (const StoreError& e) {
    std::cerr << "store error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
