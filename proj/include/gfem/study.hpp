#pragma once

#include "gfem/analysis.hpp"
#include "gfem/enrichment.hpp"
#include "gfem/reference.hpp"
#include "gfem/solver.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gfem {

enum class ProblemKind {
  /// sin(pi x) on [0, 1], u = 0 at both ends.
  BoundaryLayer,
  /// cos(pi x) on [0, 1], u(0) = 1, u(1) = -1.
  Shock,
  /// Piecewise-linear Riemann data, characteristics only.
  Riemann,
};

/// One enrichment of a set, resolved per (nu, mesh) when a cell is built.
struct EnrichmentSpec {
  std::string type;  // exponential | heaviside | steady | tanh
  /// exponential: nullopt means max|u_ic| / nu.
  std::optional<double> rate;
  double local_lo = 0.0;
  double local_hi = 1.0;
  BoundarySide side = BoundarySide::Right;
  /// tanh: thickness parameter rho and center.
  double rho = 0.0;
  double center = 0.5;
};

struct EnrichmentSet {
  std::string label;
  std::vector<EnrichmentSpec> rules;
};

enum class ReferenceKind { Auto, Fourier, Characteristics, FineFem, Steady };

struct ReferenceConfig {
  ReferenceKind kind = ReferenceKind::Auto;
  std::size_t elements = 1000;
  double dt = 1e-3;
};

struct ErrorConfig {
  std::size_t subintervals = 2000;
  std::size_t points = 4;
  H1Convention h1 = H1Convention::Full;
  /// Spacing of the error-versus-time samples.
  double series_dt = 0.01;
};

struct RiemannConfig {
  std::vector<double> b;
  double lo = 0.0;
  double hi = 2.0;
  std::size_t points = 401;
  std::vector<double> times;
};

struct StudyConfig {
  std::string name;
  std::string description;
  ProblemKind problem = ProblemKind::BoundaryLayer;
  std::vector<double> nu;
  std::vector<std::size_t> grids;
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> snapshots;
  std::vector<EnrichmentSet> sets;
  EnrichmentScaling scaling = EnrichmentScaling::PatchLocal;
  bool exclude_boundary_nodes = false;
  ReferenceConfig reference;
  ErrorConfig error;
  SolverOptions solver;
  /// Boundary points carrying Dirichlet / zero-Neumann data.
  std::vector<double> dirichlet;
  std::vector<double> neumann;
  /// Solution CSV samples per element (nodes always included).
  std::size_t points_per_element = 10;
  RiemannConfig riemann;
};

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string> &problems() const { return problems_; }

private:
  std::vector<std::string> problems_;
};

struct StudyInfo {
  std::string name;
  std::string description;
};

std::vector<StudyInfo> list_studies();

/// Built-in study definition as a config document.
nlohmann::json builtin_study(const std::string &name);

/// Reads a TOML (.toml) or JSON file into a config document.
nlohmann::json load_config_file(const std::filesystem::path &path);

/// Merges a user document onto the built-in study it names ("study" key) and
/// applies paper-fidelity settings (5000-element references, dt = 1/5000,
/// grids up to 191 elements).
nlohmann::json resolve_config(const nlohmann::json &user, bool paper_fidelity = false);

/// Parses and validates a resolved document; throws ConfigError listing
/// every problem found.
StudyConfig parse_config(const nlohmann::json &doc);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

/// Checks a document without running any numerics.
ValidationReport validate_config(const nlohmann::json &doc);

/// Fully resolved config, every default spelled out.
nlohmann::json to_json(const StudyConfig &cfg);

/// Problem with Dirichlet data at both ends.
Problem make_problem(ProblemKind kind, double nu);
/// Problem with the boundary points of a study (zero Neumann data).
Problem make_problem(const StudyConfig &cfg, double nu);
ScalarFunction initial_condition(ProblemKind kind);

/// Enrichment rules of a set on a mesh for a given nu.
std::vector<EnrichmentRule> resolve_rules(const EnrichmentSet &set, ProblemKind problem, double nu,
                                          const Mesh1D &mesh);

/// Snapshot and error-series times of a study rounded to the time grid.
std::vector<double> study_snapshot_times(const StudyConfig &cfg);
std::vector<double> study_series_times(const StudyConfig &cfg);

/// Reference solution for one nu; `note` receives a fallback message when
/// the requested kind was replaced.
std::unique_ptr<ReferenceSolution> build_reference(const StudyConfig &cfg, double nu, std::string *note = nullptr);

struct RunOptions {
  std::size_t threads = 1;
};

struct StudyResult {
  bool ok = true;
  nlohmann::json manifest;
};

/// Runs every (nu, enrichment set, grid) cell and writes solution, error and
/// convergence CSVs plus manifest.json into `out`. Cell failures are recorded
/// and the remaining cells still run.
StudyResult run_study(const StudyConfig &cfg, const std::filesystem::path &out, const RunOptions &opts = {});

/// Writes the reference solution of every nu as (x, t, u) CSV grids.
StudyResult write_references(const StudyConfig &cfg, const std::filesystem::path &out,
                             const RunOptions &opts = {});

/// Characteristics solutions of the Riemann data for every b.
StudyResult run_riemann_gallery(const StudyConfig &cfg, const std::filesystem::path &out);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

} // namespace gfem
