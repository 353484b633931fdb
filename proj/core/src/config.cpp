#include "s2gpt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "s2gpt/errors.hpp"

namespace s2gpt {

using nlohmann::json;

namespace {

// Wraps one JSON object; every key must be consumed before `finish`.
class Fields {
public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + child(it.key()) + "'");
  }

  template <class T>
  void read(const std::string& key, T& out);

  void positive(const std::string& key, double& out) {
    read(key, out);
    if (!(out > 0.0)) throw ConfigError("'" + child(key) + "' must be positive");
  }
  void at_least(const std::string& key, std::size_t& out, std::size_t lo) {
    read(key, out);
    if (out < lo) throw ConfigError("'" + child(key) + "' must be at least " + std::to_string(lo));
  }

private:
  std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string type_error(const std::string& key, const char* expected) {
  return "'" + key + "' must be " + expected;
}

template <class T>
void Fields::read(const std::string& key, T& out) {
  const json* v = get(key);
  if (!v) return;
  const std::string name = child(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v->is_boolean()) throw ConfigError(type_error(name, "a boolean"));
    out = v->get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v->is_string()) throw ConfigError(type_error(name, "a string"));
    out = v->get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
      throw ConfigError(type_error(name, "a non-negative integer"));
    out = v->get<T>();
  } else {
    if (!v->is_number()) throw ConfigError(type_error(name, "a number"));
    out = v->get<double>();
    if (!std::isfinite(out)) throw ConfigError(type_error(name, "finite"));
  }
}

std::vector<double> number_list(const json& v, const std::string& name) {
  if (!v.is_array()) throw ConfigError(type_error(name, "an array of numbers"));
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(type_error(name, "an array of numbers"));
    out.push_back(e.get<double>());
  }
  return out;
}

void read_optim(Fields& f, OptimConfig& o) {
  f.positive("learning_rate", o.learning_rate);
  f.read("epochs", o.epochs);
  f.at_least("history", o.history, 1);
  f.read("grad_tol", o.grad_tol);
  f.read("loss_change_tol", o.loss_change_tol);
  f.read("wolfe_c1", o.wolfe_c1);
  f.read("wolfe_c2", o.wolfe_c2);
  f.at_least("max_line_search", o.max_line_search, 1);
  if (o.grad_tol < 0 || o.loss_change_tol < 0) throw ConfigError("tolerances must be non-negative");
  o.validate();
}

json optim_json(const OptimConfig& o) {
  return {{"learning_rate", o.learning_rate},     {"epochs", o.epochs},
          {"history", o.history},                 {"grad_tol", o.grad_tol},
          {"loss_change_tol", o.loss_change_tol}, {"wolfe_c1", o.wolfe_c1},
          {"wolfe_c2", o.wolfe_c2},               {"max_line_search", o.max_line_search}};
}

OnlineMethod method_from_name(const std::string& s) {
  if (s == "gd") return OnlineMethod::GradientDescent;
  if (s == "adam") return OnlineMethod::Adam;
  if (s == "lbfgs") return OnlineMethod::Lbfgs;
  throw ConfigError("'online.method' must be one of gd, adam, lbfgs (got '" + s + "')");
}

// Line and column (1-based) of a byte offset.
std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Per-dimension counts whose product is `total`-ish: 100 -> {100}, {10, 10}, {5, 5, 4}.
std::vector<std::size_t> split_count(std::size_t total, std::size_t dims) {
  std::vector<std::size_t> out;
  double remaining = static_cast<double>(total);
  for (std::size_t d = 0; d < dims; ++d) {
    const double root = std::pow(remaining, 1.0 / static_cast<double>(dims - d));
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(root - 1e-9)));
    out.push_back(m);
    remaining /= static_cast<double>(m);
  }
  return out;
}

}  // namespace

std::string_view method_name(OnlineMethod m) {
  switch (m) {
    case OnlineMethod::GradientDescent: return "gd";
    case OnlineMethod::Adam: return "adam";
    case OnlineMethod::Lbfgs: return "lbfgs";
  }
  return "gd";
}

RunConfig default_run_config(const std::string& name) {
  const auto known = pde_names();
  if (std::find(known.begin(), known.end(), name) == known.end())
    throw ConfigError("unknown pde '" + name + "'");
  RunConfig c;
  c.pde = name;
  const PdePtr pde = make_pde(name);
  c.grid = default_resolution(*pde);
  c.layers = default_layers(*pde);
  if (name == "klein_gordon") {
    c.train_counts = {5, 5, 5};
    c.n_basis = 12;
    c.test.figure_mu = {{-1.22, 0.22, 0.56}};
  } else if (name == "allen_cahn") {
    c.train_counts = {10, 10};
    c.train_log = {true, false};
    c.n_basis = 12;
    c.test.figure_mu = {{0.00091, 2.6}};
  } else if (name == "burgers") {
    c.train_counts = {30};
    c.n_basis = 10;
    c.test.figure_mu = {{0.8212}};
  } else {
    c.train_counts = {10, 10};
    c.n_basis = 24;
    c.fom.weights.boundary = 100.0;
    c.fom.lbfgs.epochs = 4000;
    c.test.figure_mu = {{1.95, 3.95}};
  }
  if (!pde->has_exact_solution()) c.test.fom_reference = 10;
  return c;
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
  }
  Fields top(root, "");
  std::string name;
  top.read("pde", name);
  if (name.empty()) throw ConfigError("missing required key 'pde'");
  RunConfig c = default_run_config(name);
  const PdeSpec* spec = nullptr;

  if (const json* v = top.get("pde_options")) {
    Fields f(*v, "pde_options");
    f.read("helmholtz_k", c.pde_options.helmholtz_k);
    f.finish();
  }
  const PdePtr pde = make_pde(c.pde, c.pde_options);
  spec = pde.get();
  const std::size_t dims = spec->parameter_count();

  if (const json* v = top.get("grid")) {
    Fields f(*v, "grid");
    f.at_least("n0", c.grid.n0, 1);
    f.at_least("n1", c.grid.n1, 1);
    f.read("n_initial", c.grid.n_initial);
    f.at_least("n_boundary", c.grid.n_boundary, 1);
    f.finish();
    if (spec->time_dependent() && c.grid.n_initial == 0)
      throw ConfigError("'grid.n_initial' must be positive for a time-dependent problem");
    if (!spec->time_dependent() && c.grid.n_initial != 0)
      throw ConfigError("'grid.n_initial' must be 0 for a steady problem");
  }
  if (const json* v = top.get("parameter_box"); v && !(v->is_array() && v->empty())) {
    if (!v->is_array() || v->size() != dims)
      throw ConfigError("'parameter_box' must list " + std::to_string(dims) + " [lo, hi] pairs");
    c.parameter_box.clear();
    for (std::size_t d = 0; d < dims; ++d) {
      const auto pair = number_list((*v)[d], "parameter_box");
      const auto& full = spec->parameter_box()[d];
      if (pair.size() != 2 || !(pair[0] < pair[1]))
        throw ConfigError("'parameter_box' entries must be [lo, hi] with lo < hi");
      if (pair[0] < full.lo || pair[1] > full.hi)
        throw ConfigError("'parameter_box' for " + full.name + " leaves the admissible range");
      c.parameter_box.push_back({full.name, pair[0], pair[1]});
    }
  }
  if (const json* v = top.get("train")) {
    Fields f(*v, "train");
    if (const json* counts = f.get("counts")) {
      const auto raw = number_list(*counts, "train.counts");
      c.train_counts.clear();
      for (double r : raw) {
        if (r < 2 || r != std::floor(r)) throw ConfigError("'train.counts' entries must be integers >= 2");
        c.train_counts.push_back(static_cast<std::size_t>(r));
      }
    }
    if (const json* log = f.get("log")) {
      if (!log->is_array()) throw ConfigError(type_error("train.log", "an array of booleans"));
      c.train_log.clear();
      for (const auto& e : *log) {
        if (!e.is_boolean()) throw ConfigError(type_error("train.log", "an array of booleans"));
        c.train_log.push_back(e.get<bool>());
      }
    }
    f.finish();
  }
  if (c.train_counts.size() != dims)
    throw ConfigError("'train.counts' must have one entry per parameter (" + std::to_string(dims) + ")");
  if (!c.train_log.empty() && c.train_log.size() != dims)
    throw ConfigError("'train.log' must have one entry per parameter");

  top.at_least("n_basis", c.n_basis, 1);
  top.read("seed", c.seed);
  if (const json* v = top.get("network")) {
    Fields f(*v, "network");
    if (const json* layers = f.get("layers")) {
      const auto raw = number_list(*layers, "network.layers");
      c.layers.clear();
      for (double r : raw) {
        if (r < 1 || r != std::floor(r)) throw ConfigError("'network.layers' entries must be positive integers");
        c.layers.push_back(static_cast<int>(r));
      }
      if (c.layers.size() < 2 || c.layers.front() != 2 || c.layers.back() != 1)
        throw ConfigError("'network.layers' must start at 2 inputs and end at 1 output");
    }
    f.read("seed", c.network_seed);
    f.finish();
  }
  if (const json* v = top.get("fom")) {
    Fields f(*v, "fom");
    read_optim(f, c.fom.lbfgs);
    f.read("adam_warmup", c.fom.adam_warmup);
    f.positive("adam_learning_rate", c.fom.adam_learning_rate);
    if (const json* w = f.get("weights")) {
      Fields g(*w, "fom.weights");
      g.read("residual", c.fom.weights.residual);
      g.read("initial", c.fom.weights.initial);
      g.read("boundary", c.fom.weights.boundary);
      g.finish();
      if (c.fom.weights.residual < 0 || c.fom.weights.initial < 0 || c.fom.weights.boundary < 0)
        throw ConfigError("'fom.weights' must be non-negative");
    }
    f.at_least("threads", c.fom.threads, 1);
    f.at_least("chunk", c.fom.chunk, 1);
    f.finish();
  }
  if (const json* v = top.get("online")) {
    Fields f(*v, "online");
    std::string method(method_name(c.online.method));
    f.read("method", method);
    c.online.method = method_from_name(method);
    read_optim(f, c.online.optim);
    f.read("boundary_row_sum", c.online.loss.boundary_row_sum);
    if (c.online.loss.boundary_row_sum < 0) throw ConfigError("'online.boundary_row_sum' must be non-negative");
    f.finish();
  }
  top.at_least("threads", c.threads, 1);
  top.read("output_dir", c.output_dir);
  if (c.output_dir.empty()) throw ConfigError("'output_dir' must not be empty");
  top.read("checkpoint", c.checkpoint);
  top.read("baseline", c.baseline);
  if (const json* v = top.get("test")) {
    Fields f(*v, "test");
    f.at_least("count", c.test.count, 1);
    if (const json* fig = f.get("figure_mu")) {
      if (!fig->is_array()) throw ConfigError(type_error("test.figure_mu", "an array of parameter points"));
      c.test.figure_mu.clear();
      for (const auto& e : *fig) c.test.figure_mu.push_back(number_list(e, "test.figure_mu"));
    }
    f.read("fom_reference", c.test.fom_reference);
    f.finish();
  }
  top.finish();

  for (const auto& mu : c.test.figure_mu) {
    try {
      spec->check_parameters(mu);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("'test.figure_mu': ") + e.what());
    }
  }
  training_set(c, *spec);  // validates the counts against the box
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string to_json(const RunConfig& c) {
  json box = json::array();
  for (const auto& r : c.parameter_box) box.push_back({r.lo, r.hi});
  json fig = json::array();
  for (const auto& mu : c.test.figure_mu) fig.push_back(mu);
  json fom = optim_json(c.fom.lbfgs);
  fom["adam_warmup"] = c.fom.adam_warmup;
  fom["adam_learning_rate"] = c.fom.adam_learning_rate;
  fom["weights"] = {{"residual", c.fom.weights.residual},
                    {"initial", c.fom.weights.initial},
                    {"boundary", c.fom.weights.boundary}};
  fom["threads"] = c.fom.threads;
  fom["chunk"] = c.fom.chunk;
  json online = optim_json(c.online.optim);
  online["method"] = method_name(c.online.method);
  online["boundary_row_sum"] = c.online.loss.boundary_row_sum;
  const json j = {
      {"pde", c.pde},
      {"pde_options", {{"helmholtz_k", c.pde_options.helmholtz_k}}},
      {"grid",
       {{"n0", c.grid.n0}, {"n1", c.grid.n1}, {"n_initial", c.grid.n_initial}, {"n_boundary", c.grid.n_boundary}}},
      {"parameter_box", box},
      {"train", {{"counts", c.train_counts}, {"log", c.train_log}}},
      {"n_basis", c.n_basis},
      {"seed", c.seed},
      {"network", {{"layers", c.layers}, {"seed", c.network_seed}}},
      {"fom", fom},
      {"online", online},
      {"threads", c.threads},
      {"output_dir", c.output_dir},
      {"checkpoint", c.checkpoint},
      {"baseline", c.baseline},
      {"test", {{"count", c.test.count}, {"figure_mu", fig}, {"fom_reference", c.test.fom_reference}}},
  };
  return j.dump(2);
}

PdePtr make_pde(const RunConfig& config) { return make_pde(config.pde, config.pde_options); }

std::vector<std::vector<double>> training_set(const RunConfig& config, const PdeSpec& pde) {
  std::vector<bool> log = config.train_log;
  log.resize(config.train_counts.size(), false);
  const std::unique_ptr<bool[]> flags(new bool[log.size()]);
  for (std::size_t i = 0; i < log.size(); ++i) flags[i] = log[i];
  try {
    return sample_parameter_grid(pde, config.train_counts, std::span<const bool>(flags.get(), log.size()),
                                 config.parameter_box.empty() ? nullptr : &config.parameter_box);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("training set: ") + e.what());
  }
}

std::vector<std::vector<double>> test_set(const RunConfig& config, const PdeSpec& pde) {
  const auto& box = config.parameter_box.empty() ? pde.parameter_box() : config.parameter_box;
  const auto counts = split_count(config.test.count, box.size());
  std::vector<std::vector<double>> axes;
  for (std::size_t d = 0; d < box.size(); ++d) {
    const bool log = d < config.train_log.size() && config.train_log[d];
    const double lo = log ? std::log(box[d].lo) : box[d].lo;
    const double hi = log ? std::log(box[d].hi) : box[d].hi;
    std::vector<double> axis;
    for (std::size_t i = 0; i < counts[d]; ++i) {
      const double v = lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(counts[d]);
      axis.push_back(log ? std::exp(v) : v);
    }
    axes.push_back(std::move(axis));
  }
  const auto train = training_set(config, pde);
  const std::set<std::vector<double>> taken(train.begin(), train.end());
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> idx(box.size(), 0);
  for (;;) {
    std::vector<double> mu(box.size());
    for (std::size_t d = 0; d < box.size(); ++d) mu[d] = axes[d][idx[d]];
    if (!taken.count(mu) && out.size() < config.test.count) out.push_back(std::move(mu));
    std::size_t d = box.size();
    while (d > 0 && ++idx[d - 1] == counts[d - 1]) idx[--d] = 0;
    if (d == 0) break;
  }
  return out;
}

GreedyConfig greedy_config(const RunConfig& config) {
  GreedyConfig g;
  g.n_basis = config.n_basis;
  g.seed = config.seed;
  g.net.layers = config.layers;
  g.net.seed = config.network_seed;
  g.fom = config.fom;
  g.online = config.online;
  g.threads = config.threads;
  return g;
}

}  // namespace s2gpt
