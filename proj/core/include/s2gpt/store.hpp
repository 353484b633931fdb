#pragma once

#include <filesystem>

#include "s2gpt/config.hpp"
#include "s2gpt/greedy.hpp"

namespace s2gpt {

inline constexpr int kStoreFormatVersion = 1;

/// An offline run as persisted on disk.
///
///   manifest.json        format/library versions, seeds, config echo
///   snapshots/mu_<k>.json  trained network parameters, one file per snapshot
///   basis.json           magic/residual points, alphas, parameters
///   tables.bin           xi, beta and residual arrays (little-endian doubles,
///   tables.json          column-major; shapes and offsets in the sidecar)
///   trace.json           greedy steps and sweeps, exact
///   trace.csv            one row per (width, training parameter); no times
///   timing.csv           per-step FOM and sweep wall times
///   errors.csv           per-snapshot FOM loss terms and exact-solution error
///
/// Snapshot jet tables are not stored; they are recomputed from the network
/// parameters on load.
struct StoredRun {
  RunConfig config;
  MetaArtifact artifact;
  GreedyTrace trace;
};

/// Writes the store into `dir` via `dir.partial`, so an interrupted save
/// never leaves a half-written store under `dir`. An existing `dir` is
/// replaced only if it is itself a store.
void save_store(const std::filesystem::path& dir, const RunConfig& config, const MetaArtifact& artifact,
                const GreedyTrace& trace);

/// Throws StoreError on a missing or malformed store.
StoredRun load_store(const std::filesystem::path& dir);

/// One snapshot as a standalone JSON document (the snapshots/ format).
void save_snapshot(const std::filesystem::path& file, const Snapshot& snapshot);

/// The grid an artifact was built on.
CollocationGrid artifact_grid(const PdeSpec& pde, const MetaArtifact& artifact);

}  // namespace s2gpt
