#include "s2gpt/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "text.hpp"

namespace s2gpt {

using nlohmann::json;
namespace fs = std::filesystem;
using detail::CsvWriter;
using detail::num;

static_assert(std::endian::native == std::endian::little, "tables.bin is written in host byte order");

namespace {

constexpr const char* kFormatName = "s2gpt-store";
constexpr const char* kLibraryVersion = "0.1.0";

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json index_json(std::size_t i) { return i == kNoPoint ? json(nullptr) : json(i); }
std::size_t index_from(const json& j) { return j.is_null() ? kNoPoint : j.get<std::size_t>(); }

OptimStatus status_from(const std::string& s) {
  for (auto st : {OptimStatus::Converged, OptimStatus::MaxEpochs, OptimStatus::LineSearchFailed,
                  OptimStatus::Diverged})
    if (status_name(st) == s) return st;
  throw StoreError("unknown optimizer status '" + s + "'");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StoreError("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw StoreError(path.string() + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json snapshot_json(const Snapshot& s, std::size_t k) {
  return {{"index", k},
          {"mu", s.mu},
          {"layers", s.params.layers},
          {"seed", s.seed},
          {"loss", number(s.loss)},
          {"terms", {{"residual", s.terms.residual}, {"initial", s.terms.initial}, {"boundary", s.terms.boundary}}},
          {"seconds", s.seconds},
          {"status", status_name(s.status)},
          {"epochs", s.epochs},
          {"params", vec_json(s.params.flatten())}};
}

Snapshot snapshot_from(const json& j, const CollocationGrid& grid, const PdeSpec& pde) {
  Snapshot s;
  s.mu = j.at("mu").get<std::vector<double>>();
  const auto layers = j.at("layers").get<std::vector<int>>();
  s.params = zero_params(layers);
  const Eigen::VectorXd flat = vec_from(j.at("params"));
  if (static_cast<std::size_t>(flat.size()) != s.params.parameter_count())
    throw StoreError("snapshot parameter count does not match its layers");
  s.params.assign(flat);
  s.seed = j.at("seed").get<std::uint64_t>();
  s.loss = number_from(j.at("loss"));
  s.terms.residual = j.at("terms").at("residual").get<double>();
  s.terms.initial = j.at("terms").at("initial").get<double>();
  s.terms.boundary = j.at("terms").at("boundary").get<double>();
  s.seconds = j.at("seconds").get<double>();
  s.status = status_from(j.at("status").get<std::string>());
  s.epochs = j.at("epochs").get<std::size_t>();
  s.tables = snapshot_tables(s.params, grid, pde);
  return s;
}

json step_json(const GreedyStep& s) {
  return {{"n", s.n},
          {"train_index", s.train_index},
          {"mu", s.mu},
          {"worst_delta", number(s.worst_delta)},
          {"magic_point", s.magic_point},
          {"residual_point", index_json(s.residual_point)},
          {"residual_degenerate", s.residual_degenerate},
          {"skipped", s.skipped},
          {"fom_loss", number(s.fom_loss)},
          {"fom_seconds", s.fom_seconds},
          {"offline_fom_seconds", s.offline_fom_seconds},
          {"offline_sweep_seconds", s.offline_sweep_seconds}};
}

GreedyStep step_from(const json& j) {
  GreedyStep s;
  s.n = j.at("n").get<std::size_t>();
  s.train_index = j.at("train_index").get<std::size_t>();
  s.mu = j.at("mu").get<std::vector<double>>();
  s.worst_delta = number_from(j.at("worst_delta"));
  s.magic_point = j.at("magic_point").get<std::size_t>();
  s.residual_point = index_from(j.at("residual_point"));
  s.residual_degenerate = j.at("residual_degenerate").get<bool>();
  s.skipped = j.at("skipped").get<std::vector<std::size_t>>();
  s.fom_loss = number_from(j.at("fom_loss"));
  s.fom_seconds = j.at("fom_seconds").get<double>();
  s.offline_fom_seconds = j.at("offline_fom_seconds").get<double>();
  s.offline_sweep_seconds = j.at("offline_sweep_seconds").get<double>();
  return s;
}

json sweep_json(const SweepRecord& r) {
  json delta = json::array();
  for (double d : r.delta) delta.push_back(number(d));
  std::vector<int> diverged(r.diverged.begin(), r.diverged.end());
  return {{"width", r.width}, {"delta", delta}, {"epochs", r.epochs}, {"diverged", diverged}, {"seconds", r.seconds}};
}

SweepRecord sweep_from(const json& j) {
  SweepRecord r;
  r.width = j.at("width").get<std::size_t>();
  for (const auto& d : j.at("delta")) r.delta.push_back(number_from(d));
  r.epochs = j.at("epochs").get<std::vector<std::size_t>>();
  for (int d : j.at("diverged").get<std::vector<int>>()) r.diverged.push_back(static_cast<char>(d));
  r.seconds = j.at("seconds").get<double>();
  return r;
}

// Arrays in tables.bin, in file order.
struct ArrayRef {
  const char* name;
  const Eigen::MatrixXd* m;
};

void write_tables(const fs::path& dir, const ReducedBasis& b) {
  const ArrayRef arrays[] = {{"xi", &b.xi}, {"beta", &b.beta}, {"residuals", &b.residuals}};
  std::ofstream bin(dir / "tables.bin", std::ios::binary);
  if (!bin) throw StoreError("cannot write tables.bin");
  json side = {{"byte_order", "little"}, {"dtype", "float64"}, {"order", "column_major"}, {"arrays", json::array()}};
  std::size_t offset = 0;
  for (const auto& a : arrays) {
    const std::size_t count = static_cast<std::size_t>(a.m->size());
    bin.write(reinterpret_cast<const char*>(a.m->data()), static_cast<std::streamsize>(count * sizeof(double)));
    side["arrays"].push_back({{"name", a.name}, {"rows", a.m->rows()}, {"cols", a.m->cols()}, {"offset", offset}});
    offset += count * sizeof(double);
  }
  if (!bin) throw StoreError("write failed for tables.bin");
  side["bytes"] = offset;
  detail::write_text(dir / "tables.json", dump(side));
}

void read_tables(const fs::path& dir, ReducedBasis& b) {
  const json side = read_json(dir / "tables.json");
  std::ifstream bin(dir / "tables.bin", std::ios::binary);
  if (!bin) throw StoreError("missing tables.bin");
  std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (bytes.size() != side.at("bytes").get<std::size_t>()) throw StoreError("tables.bin has the wrong size");
  for (const auto& a : side.at("arrays")) {
    const auto rows = a.at("rows").get<Eigen::Index>();
    const auto cols = a.at("cols").get<Eigen::Index>();
    const auto offset = a.at("offset").get<std::size_t>();
    if (offset + static_cast<std::size_t>(rows * cols) * sizeof(double) > bytes.size())
      throw StoreError("tables.json points past the end of tables.bin");
    Eigen::MatrixXd m(rows, cols);
    std::memcpy(m.data(), bytes.data() + offset, static_cast<std::size_t>(m.size()) * sizeof(double));
    const auto name = a.at("name").get<std::string>();
    if (name == "xi") b.xi = std::move(m);
    else if (name == "beta") b.beta = std::move(m);
    else if (name == "residuals") b.residuals = std::move(m);
    else throw StoreError("unknown array '" + name + "' in tables.json");
  }
}

std::vector<std::string> mu_cells(const std::vector<double>& mu) {
  std::vector<std::string> out;
  for (double v : mu) out.push_back(num(v));
  return out;
}

std::vector<std::string> mu_header(const PdeSpec& pde) {
  std::vector<std::string> out;
  for (const auto& r : pde.parameter_box()) out.push_back(r.name);
  return out;
}

template <class... Parts>
std::vector<std::string> cat(Parts&&... parts) {
  std::vector<std::string> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

void write_csvs(const fs::path& dir, const PdeSpec& pde, const CollocationGrid& grid, const MetaArtifact& art,
                const GreedyTrace& trace) {
  const auto names = mu_header(pde);
  {
    CsvWriter w(dir / "trace.csv",
                cat(std::vector<std::string>{"width", "train_index"}, names,
                    std::vector<std::string>{"delta", "epochs", "diverged"}));
    for (const auto& s : trace.sweeps)
      for (std::size_t k = 0; k < s.delta.size(); ++k)
        w.row(cat(std::vector<std::string>{num(s.width), num(k)}, mu_cells(art.train[k]),
                  std::vector<std::string>{num(s.delta[k]), num(s.epochs[k]), s.diverged[k] ? "1" : "0"}));
  }
  {
    CsvWriter w(dir / "timing.csv", {"n", "fom_seconds", "offline_fom_seconds", "sweep_width", "sweep_seconds",
                                     "offline_sweep_seconds"});
    for (const auto& st : trace.steps) {
      const std::size_t width = st.n;
      const double sweep = width <= trace.sweeps.size() ? trace.sweeps[width - 1].seconds : 0.0;
      w.row({num(st.n), num(st.fom_seconds), num(st.offline_fom_seconds), num(width), num(sweep),
             num(st.offline_sweep_seconds)});
    }
  }
  {
    CsvWriter w(dir / "errors.csv", cat(std::vector<std::string>{"n"}, names,
                                        std::vector<std::string>{"fom_loss", "residual", "initial", "boundary",
                                                                 "status", "epochs", "exact_rel_l2"}));
    for (std::size_t i = 0; i < art.snapshots.size(); ++i) {
      const Snapshot& s = art.snapshots[i];
      std::string exact;
      if (pde.has_exact_solution()) {
        const Eigen::VectorXd& u = s.tables[Slot::U];
        double num2 = 0.0, den2 = 0.0;
        for (std::size_t p = 0; p < grid.size(); ++p) {
          const double e = pde.exact_solution(grid.points[p], s.mu);
          num2 += (u[static_cast<Eigen::Index>(p)] - e) * (u[static_cast<Eigen::Index>(p)] - e);
          den2 += e * e;
        }
        exact = den2 > 0 ? num(std::sqrt(num2 / den2)) : "";
      }
      w.row(cat(std::vector<std::string>{num(i + 1)}, mu_cells(s.mu),
                std::vector<std::string>{num(s.loss), num(s.terms.residual), num(s.terms.initial),
                                         num(s.terms.boundary), std::string(status_name(s.status)),
                                         num(s.epochs), exact}));
    }
  }
}

bool is_store(const fs::path& dir) { return fs::is_regular_file(dir / "manifest.json"); }

}  // namespace

void save_snapshot(const fs::path& file, const Snapshot& snapshot) {
  detail::write_text(file, dump(snapshot_json(snapshot, 0)));
}

CollocationGrid artifact_grid(const PdeSpec& pde, const MetaArtifact& artifact) {
  return build_grid(pde, artifact.resolution);
}

void save_store(const fs::path& dir, const RunConfig& config, const MetaArtifact& art, const GreedyTrace& trace) {
  if (fs::exists(dir) && !is_store(dir))
    throw StoreError(dir.string() + " exists and is not an artifact store; refusing to overwrite it");
  const PdePtr pde = make_pde(art.pde, art.pde_options);
  const CollocationGrid grid = artifact_grid(*pde, art);
  if (art.basis.grid_size != grid.size()) throw StoreError("basis does not match the artifact grid");

  fs::path tmp = dir;
  tmp += ".partial";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp / "snapshots");

  json snapshot_files = json::array();
  for (std::size_t k = 0; k < art.snapshots.size(); ++k) {
    const std::string rel = "snapshots/mu_" + std::to_string(k) + ".json";
    detail::write_text(tmp / rel, dump(snapshot_json(art.snapshots[k], k)));
    snapshot_files.push_back(rel);
  }

  json alphas = json::array();
  for (const auto& a : art.basis.alphas) alphas.push_back(vec_json(a));
  const json basis = {{"grid_size", art.basis.grid_size},
                      {"size", art.basis.size()},
                      {"magic", art.basis.magic},
                      {"residual_points", art.basis.residual_points},
                      {"alphas", alphas},
                      {"mu", art.basis.mu}};
  detail::write_text(tmp / "basis.json", dump(basis));
  write_tables(tmp, art.basis);

  json sweeps = json::array();
  for (const auto& s : trace.sweeps) sweeps.push_back(sweep_json(s));
  json steps = json::array();
  for (const auto& s : trace.steps) steps.push_back(step_json(s));
  detail::write_text(tmp / "trace.json", dump({{"seed", trace.seed}, {"steps", steps}, {"sweeps", sweeps}}));
  write_csvs(tmp, *pde, grid, art, trace);

  const json manifest = {
      {"format", kFormatName},
      {"format_version", kStoreFormatVersion},
      {"library_version", kLibraryVersion},
      {"pde", art.pde},
      {"pde_options", {{"helmholtz_k", art.pde_options.helmholtz_k}}},
      {"resolution",
       {{"n0", art.resolution.n0}, {"n1", art.resolution.n1}, {"n_initial", art.resolution.n_initial},
        {"n_boundary", art.resolution.n_boundary}}},
      {"grid_points", grid.size()},
      {"basis_size", art.basis.size()},
      {"sparse_points", art.basis.magic.size() + art.basis.residual_points.size()},
      {"seeds", {{"greedy", trace.seed}, {"network", config.network_seed}}},
      {"train", art.train},
      {"snapshots", snapshot_files},
      {"config", json::parse(to_json(config))},
  };
  detail::write_text(tmp / "manifest.json", dump(manifest));

  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

StoredRun load_store(const fs::path& dir) {
  if (!is_store(dir)) throw StoreError(dir.string() + " is not an artifact store (no manifest.json)");
  StoredRun out;
  try {
    const json manifest = read_json(dir / "manifest.json");
    if (manifest.at("format") != kFormatName) throw StoreError("unrecognised store format");
    if (manifest.at("format_version").get<int>() != kStoreFormatVersion)
      throw StoreError("unsupported store format version " + manifest.at("format_version").dump());
    out.config = parse_run_config(manifest.at("config").dump());

    MetaArtifact& art = out.artifact;
    art.pde = manifest.at("pde").get<std::string>();
    art.pde_options.helmholtz_k = manifest.at("pde_options").at("helmholtz_k").get<double>();
    const json& r = manifest.at("resolution");
    art.resolution = {r.at("n0").get<std::size_t>(), r.at("n1").get<std::size_t>(),
                      r.at("n_initial").get<std::size_t>(), r.at("n_boundary").get<std::size_t>()};
    art.train = manifest.at("train").get<std::vector<std::vector<double>>>();
    const PdePtr pde = make_pde(art.pde, art.pde_options);
    const CollocationGrid grid = artifact_grid(*pde, art);

    for (const auto& rel : manifest.at("snapshots"))
      art.snapshots.push_back(snapshot_from(read_json(dir / rel.get<std::string>()), grid, *pde));

    const json basis = read_json(dir / "basis.json");
    art.basis = ReducedBasis(basis.at("grid_size").get<std::size_t>());
    art.basis.magic = basis.at("magic").get<std::vector<std::size_t>>();
    art.basis.residual_points = basis.at("residual_points").get<std::vector<std::size_t>>();
    for (const auto& a : basis.at("alphas")) art.basis.alphas.push_back(vec_from(a));
    art.basis.mu = basis.at("mu").get<std::vector<std::vector<double>>>();
    read_tables(dir, art.basis);
    const auto n = static_cast<Eigen::Index>(art.basis.size());
    if (art.basis.grid_size != grid.size() || art.basis.xi.rows() != static_cast<Eigen::Index>(grid.size()) ||
        art.basis.xi.cols() != n || art.basis.beta.rows() != n || art.snapshots.size() != art.basis.size())
      throw StoreError("basis arrays are inconsistent with the manifest");

    const json trace = read_json(dir / "trace.json");
    out.trace.seed = trace.at("seed").get<std::uint64_t>();
    for (const auto& s : trace.at("steps")) out.trace.steps.push_back(step_from(s));
    for (const auto& s : trace.at("sweeps")) out.trace.sweeps.push_back(sweep_from(s));
  } catch (const json::exception& e) {
    throw StoreError(dir.string() + ": malformed store: " + e.what());
  } catch (const ConfigError& e) {
    throw StoreError(dir.string() + ": stored config is invalid: " + e.what());
  }
  return out;
}

}  // namespace s2gpt
