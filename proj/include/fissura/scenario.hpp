#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fissura/energy.hpp"
#include "fissura/grid.hpp"
#include "fissura/solver.hpp"

namespace fissura {

enum class ScenarioKind { Tension, Compression, ShearPatch, PrecrackedPlate, Calibration, RecoveryCheck, LemmaCheck };

std::string to_string(ScenarioKind k);
ScenarioKind parse_scenario(const std::string& name);  // throws std::invalid_argument

// Straight notch; nodes within half a cell of the segment form the notch.
struct NotchSpec {
  bool enabled = false;
  Vec2 p{0.0, 0.5};
  Vec2 q{1.0, 0.5};
  bool pinned = true;  // v held at 0 on the notch; otherwise only the initial v is zero there
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Tension;
  int nx = 64;
  int ny = 64;
  double lx = 1.0;
  double ly = 1.0;
  ModelParams model;
  std::vector<double> loads{0.1};
  SolveOptions solver;
  NotchSpec notch;
  std::vector<double> recovery_eps{0.08, 0.04, 0.02};
  int lemma_trials = 1000;
  int lemma_samples = 64;
  double lemma_p = 2.0;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "fissura_out";
  bool write_fields = true;

  std::vector<std::string> warnings;
};

// Configuration problem attributed to a "section.key" name.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Parses INI text (sections scenario, grid, model, load, solver, notch,
// recovery, lemma, output) and applies "section.key=value" overrides.
// Throws ConfigError naming the offending key.
ScenarioConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});
ScenarioConfig parse_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Nodes within half a cell of the segment pq.
std::vector<unsigned char> notch_nodes(const Grid& grid, const Vec2& p, const Vec2& q);

// Full-boundary affine Dirichlet data u = t W x.
DirichletSpec affine_boundary(const Mat2& W);

struct BranchRun {
  AlternateResult result;
  double min_v = 0.0;
  double max_v = 0.0;
  EnergyBreakdown energy;
};

// Runs one branch from u = 0 with the given initial phase and pinned nodes.
BranchRun run_branch(const Grid& grid, const ModelParams& p, const DirichletSpec& bc, double t, const Field& v0,
                     const SolveOptions& opt, const std::vector<unsigned char>& pinned = {});

struct ScenarioOutcome {
  int exit_code = 0;  // 0 ok, 2 non-convergence
  std::string summary;
  std::vector<std::filesystem::path> files;
};

// Executes the scenario, writes its artifacts into config.output_dir and
// returns the summary (also written to summary.txt).
ScenarioOutcome run_scenario(const ScenarioConfig& config);

}  // namespace fissura
