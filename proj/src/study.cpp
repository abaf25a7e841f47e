#include "gfem/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>

namespace gfem {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F> void parallel_for(std::size_t count, std::size_t threads, F &&body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto &t : pool) t.join();
}

class Csv {
public:
  Csv(const std::filesystem::path &path, const std::vector<std::string> &header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto &f : fields) {
      out_ << (first ? "" : ",") << f;
      first = false;
    }
    out_ << '\n';
  }

private:
  std::ofstream out_;
};

std::string nu_tag(double nu) { return "nu-" + format_double(nu); }

std::string rate_field(const std::optional<double> &r) { return r ? format_double(*r) : ""; }

double max_abs_ic(const ScalarFunction &u_ic, double lo, double hi) {
  double m = 0.0;
  for (int k = 0; k <= 10000; ++k) m = std::max(m, std::abs(u_ic(lo + (hi - lo) * k / 10000.0)));
  return m;
}

ReferenceKind resolve_kind(const StudyConfig &cfg, double nu) {
  if (cfg.reference.kind != ReferenceKind::Auto) return cfg.reference.kind;
  if (nu == 0.0) return ReferenceKind::Characteristics;
  return cfg.problem == ProblemKind::BoundaryLayer ? ReferenceKind::Fourier : ReferenceKind::FineFem;
}

ScalarFunction ic_slope(ProblemKind kind) {
  switch (kind) {
  case ProblemKind::BoundaryLayer: return [](double x) { return kPi * std::cos(kPi * x); };
  case ProblemKind::Shock: return [](double x) { return -kPi * std::sin(kPi * x); };
  case ProblemKind::Riemann: break;
  }
  return {};
}

std::vector<double> snap_to_grid(std::vector<double> times, double dt) {
  std::set<long long> steps;
  for (double t : times) steps.insert(std::llround(t / dt));
  std::vector<double> out;
  for (long long s : steps) out.push_back(static_cast<double>(s) * dt);
  return out;
}

/// Nodes of the mesh plus (k - 1) interior points per element.
std::vector<double> sample_points(const Mesh1D &mesh, std::size_t per_element) {
  std::vector<double> xs;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    for (std::size_t k = 0; k < per_element; ++k) {
      xs.push_back(mesh.element_left(e) + mesh.element_size(e) * static_cast<double>(k) /
                                              static_cast<double>(per_element));
    }
  }
  xs.push_back(mesh.hi());
  return xs;
}

struct CellResult {
  json record;
  bool ok = false;
  /// Errors at the study snapshot times (for convergence tables).
  std::vector<ErrorSample> snapshot_errors;
};

json history_stats(const SolutionHistory &h) {
  std::size_t total = 0, worst = 0;
  for (std::size_t k : h.newton_iterations) {
    total += k;
    worst = std::max(worst, k);
  }
  const double mean = h.newton_iterations.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(h.newton_iterations.size());
  return {{"steps", h.newton_iterations.size()},
          {"newton_iterations_total", total},
          {"newton_iterations_max", worst},
          {"newton_iterations_mean", mean},
          {"max_linear_refinements", h.max_linear_refinements},
          {"max_energy_ratio", h.max_energy_ratio},
          {"beta", h.beta},
          {"quadrature_points", h.quadrature_points}};
}

void write_solution_csv(const std::filesystem::path &path, const SolutionHistory &h, const GfemSpace &space,
                        std::size_t per_element, const std::vector<double> &times) {
  Csv csv(path, {"x", "t", "u"});
  const std::vector<double> xs = sample_points(space.mesh(), per_element);
  for (std::size_t i = 0; i < h.times.size(); ++i) {
    const bool wanted = std::any_of(times.begin(), times.end(),
                                    [&](double t) { return std::abs(t - h.times[i]) <= 1e-9 * std::max(1.0, t); });
    if (!wanted) continue;
    const Vector &c = h.coefficients[i];
    for (double x : xs) {
      const double u = space.evaluate({c.data(), static_cast<std::size_t>(c.size())}, x).value;
      csv.row({format_double(x), format_double(h.times[i]), format_double(u)});
    }
  }
}

CellResult run_cell(const StudyConfig &cfg, double nu, const EnrichmentSet &set, std::size_t n,
                    const ReferenceSolution *reference, const std::vector<double> &snaps,
                    const std::vector<double> &series, const std::filesystem::path &out) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string id = nu_tag(nu) + "_" + set.label + "_n" + std::to_string(n);
  CellResult res;
  json &rec = res.record;
  rec = {{"id", id}, {"nu", nu}, {"set", set.label}, {"elements", n}};
  std::string stage = "setup";
  try {
    Mesh1D mesh = build_uniform_mesh(n, 0.0, 1.0);
    EnrichmentOptions eo;
    eo.scaling = cfg.scaling;
    eo.exclude_boundary_nodes = cfg.exclude_boundary_nodes;
    GfemSpace space(mesh, resolve_rules(set, cfg.problem, nu, mesh), eo);
    rec["dofs"] = space.size();
    rec["dof_warnings"] = space.dof_map().warnings;

    std::vector<double> all = snaps;
    all.insert(all.end(), series.begin(), series.end());
    all = snap_to_grid(all, cfg.dt);
    const Problem problem = make_problem(cfg, nu);

    stage = "simulation";
    SolutionHistory history;
    bool partial = false;
    try {
      history = run_simulation(problem, space, TimeConfig{cfg.dt, cfg.t_end, all}, cfg.solver);
    } catch (const SimulationError &ex) {
      history = ex.partial();
      partial = true;
      rec["error"] = {{"stage", stage}, {"message", ex.what()}, {"failed_step", ex.failed_step()}};
    }
    rec["stats"] = history_stats(history);

    const std::string sol_file = "solution_" + id + ".csv";
    write_solution_csv(out / sol_file, history, space, cfg.points_per_element, snaps);
    rec["files"] = {sol_file};

    if (reference) {
      stage = "errors";
      ErrorQuadrature quad;
      quad.subintervals = cfg.error.subintervals;
      quad.points = cfg.error.points;
      quad.h1 = cfg.error.h1;
      std::vector<double> stored;
      for (double t : series) {
        if (std::any_of(history.times.begin(), history.times.end(),
                        [&](double s) { return std::abs(s - t) <= 1e-9 * std::max(1.0, t); })) {
          stored.push_back(t);
        }
      }
      const auto samples = error_time_series(history, space, *reference, stored, quad);
      const std::string err_file = "errors_" + id + ".csv";
      Csv csv(out / err_file, {"t", "dofs", "rel_l2", "rel_h1"});
      for (const auto &s : samples) {
        csv.row({format_double(s.time), std::to_string(s.dofs), format_double(s.rel_l2), format_double(s.rel_h1)});
        for (double t : snaps) {
          if (std::abs(t - s.time) <= 1e-9 * std::max(1.0, t)) res.snapshot_errors.push_back(s);
        }
      }
      rec["files"].push_back(err_file);
    }
    res.ok = !partial;
    rec["status"] = partial ? "partial" : "complete";
  } catch (const std::exception &ex) {
    rec["status"] = "failed";
    rec["error"] = {{"stage", stage}, {"message", ex.what()}};
  }
  rec["wall_time_s"] = elapsed_since(t0);
  return res;
}

void write_manifest(const std::filesystem::path &out, const json &manifest) {
  std::ofstream f(out / "manifest.json");
  f << manifest.dump(2) << '\n';
}

} // namespace

ScalarFunction initial_condition(ProblemKind kind) {
  switch (kind) {
  case ProblemKind::BoundaryLayer: return [](double x) { return std::sin(kPi * x); };
  case ProblemKind::Shock: return [](double x) { return std::cos(kPi * x); };
  case ProblemKind::Riemann: return [](double x) { return riemann_ic(0.0, x); };
  }
  return {};
}

Problem make_problem(ProblemKind kind, double nu) {
  StudyConfig cfg;
  cfg.problem = kind;
  cfg.dirichlet = {0.0, 1.0};
  return make_problem(cfg, nu);
}

Problem make_problem(const StudyConfig &cfg, double nu) {
  if (cfg.problem == ProblemKind::Riemann) {
    throw std::invalid_argument("make_problem: Riemann data is evaluated by characteristics only");
  }
  Problem p;
  p.nu = nu;
  p.u_ic = initial_condition(cfg.problem);
  const bool shock = cfg.problem == ProblemKind::Shock;
  for (double x : cfg.dirichlet) {
    const double g = shock ? (x == 0.0 ? 1.0 : -1.0) : 0.0;
    p.dirichlet.push_back({x, [g](double) { return g; }});
  }
  for (double x : cfg.neumann) p.neumann.push_back({x, [](double) { return 0.0; }});
  return p;
}

std::vector<EnrichmentRule> resolve_rules(const EnrichmentSet &set, ProblemKind problem, double nu,
                                          const Mesh1D &mesh) {
  std::vector<EnrichmentRule> rules;
  for (const auto &spec : set.rules) {
    if (spec.type == "exponential") {
      double rate = 0.0;
      if (spec.rate) {
        rate = *spec.rate;
      } else {
        if (!(nu > 0.0)) throw std::invalid_argument("exponential enrichment: automatic rate needs nu > 0");
        rate = max_abs_ic(initial_condition(problem), mesh.lo(), mesh.hi()) / nu;
      }
      rules.push_back({Exponential{rate}, spec.local_lo, spec.local_hi});
    } else if (spec.type == "heaviside") {
      const double xb = spec.side == BoundarySide::Right ? mesh.hi() : mesh.lo();
      rules.push_back({HeavisideBoundary{spec.side}, xb, xb});
    } else if (spec.type == "steady") {
      const double k = solve_steady_k(nu);
      const double thickness = nu / std::sqrt(2.0 * k);
      const auto [lo, hi] = local_domain_for_tanh(0.5, nu, mesh.h());
      rules.push_back({TanhShock{0.5, thickness}, lo, hi});
    } else if (spec.type == "tanh") {
      const auto [lo, hi] = local_domain_for_tanh(spec.center, spec.rho, mesh.h());
      rules.push_back({TanhShock{spec.center, spec.rho}, lo, hi});
    } else {
      throw std::invalid_argument("unknown enrichment type '" + spec.type + "'");
    }
  }
  return rules;
}

std::vector<double> study_snapshot_times(const StudyConfig &cfg) { return snap_to_grid(cfg.snapshots, cfg.dt); }

std::vector<double> study_series_times(const StudyConfig &cfg) {
  std::vector<double> ts = cfg.snapshots;
  const auto count = static_cast<long long>(std::floor(cfg.t_end / cfg.error.series_dt + 1e-9));
  for (long long k = 0; k <= count; ++k) ts.push_back(static_cast<double>(k) * cfg.error.series_dt);
  std::vector<double> out;
  for (double t : snap_to_grid(ts, cfg.dt)) {
    if (t <= cfg.t_end + 1e-12) out.push_back(t);
  }
  return out;
}

std::unique_ptr<ReferenceSolution> build_reference(const StudyConfig &cfg, double nu, std::string *note) {
  const ReferenceKind kind = resolve_kind(cfg, nu);
  const auto fine = [&]() -> std::unique_ptr<ReferenceSolution> {
    std::vector<double> times = study_series_times(cfg);
    SolverOptions opts = cfg.solver;
    opts.quadrature_points = 0;
    return fine_fem_reference(make_problem(cfg, nu), 0.0, 1.0, cfg.reference.elements, cfg.reference.dt,
                              snap_to_grid(times, cfg.reference.dt), opts);
  };
  switch (kind) {
  case ReferenceKind::Fourier: {
    FourierParams params;
    params.nu = nu;
    try {
      auto ref = std::make_unique<FourierSolution>(params);
      // Truncation problems show up at evaluation; probe every sample time.
      for (double t : study_series_times(cfg)) {
        for (double x : {0.25, 0.5, 0.9, 0.99}) (void)ref->derivative(x, t);
      }
      return ref;
    } catch (const SeriesTruncationError &ex) {
      if (cfg.reference.kind != ReferenceKind::Auto) throw;
      if (note) *note = std::string("Fourier series unusable (") + ex.what() + "); fell back to fine FEM";
      return fine();
    }
  }
  case ReferenceKind::Characteristics:
    return std::make_unique<InviscidSolution>(initial_condition(cfg.problem), 0.0, 1.0, ic_slope(cfg.problem));
  case ReferenceKind::FineFem:
    return fine();
  case ReferenceKind::Steady:
    return std::make_unique<SteadyShockSolution>(nu);
  case ReferenceKind::Auto:
    break;
  }
  throw std::logic_error("build_reference: unresolved reference kind");
}

StudyResult run_study(const StudyConfig &cfg, const std::filesystem::path &out, const RunOptions &opts) {
  if (cfg.problem == ProblemKind::Riemann) return run_riemann_gallery(cfg, out);
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out);
  json manifest{{"config", to_json(cfg)}, {"status", "running"}, {"partial", true}, {"threads", opts.threads}};
  write_manifest(out, manifest);

  const std::vector<double> snaps = study_snapshot_times(cfg);
  const std::vector<double> series = study_series_times(cfg);
  manifest["resolved_times"] = {{"snapshots", snaps}, {"series", series}};

  std::vector<std::unique_ptr<ReferenceSolution>> refs(cfg.nu.size());
  std::vector<json> ref_records(cfg.nu.size());
  parallel_for(cfg.nu.size(), opts.threads, [&](std::size_t i) {
    const auto r0 = std::chrono::steady_clock::now();
    json rec{{"nu", cfg.nu[i]}};
    try {
      std::string note;
      refs[i] = build_reference(cfg, cfg.nu[i], &note);
      rec["kind"] = refs[i]->kind();
      rec["metadata"] = refs[i]->metadata();
      if (!note.empty()) rec["note"] = note;
      rec["status"] = "complete";
    } catch (const std::exception &ex) {
      rec["status"] = "failed";
      rec["error"] = ex.what();
    }
    rec["wall_time_s"] = elapsed_since(r0);
    ref_records[i] = rec;
  });

  struct Job {
    std::size_t nu, set, grid;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < cfg.nu.size(); ++i)
    for (std::size_t s = 0; s < cfg.sets.size(); ++s)
      for (std::size_t g = 0; g < cfg.grids.size(); ++g) jobs.push_back({i, s, g});
  std::vector<CellResult> results(jobs.size());
  parallel_for(jobs.size(), opts.threads, [&](std::size_t j) {
    const Job &job = jobs[j];
    results[j] = run_cell(cfg, cfg.nu[job.nu], cfg.sets[job.set], cfg.grids[job.grid], refs[job.nu].get(),
                          snaps, series, out);
  });

  bool ok = true;
  json errors = json::array();
  for (const auto &r : ref_records) {
    if (r["status"] != "complete") {
      ok = false;
      errors.push_back({{"stage", "reference"}, {"nu", r["nu"]}, {"message", r["error"]}});
    }
  }
  json cells = json::array();
  for (const auto &r : results) {
    cells.push_back(r.record);
    if (!r.ok) {
      ok = false;
      if (r.record.contains("error")) {
        json e = r.record["error"];
        e["cell"] = r.record["id"];
        errors.push_back(e);
      }
    }
  }

  json tables = json::array();
  for (std::size_t i = 0; i < cfg.nu.size(); ++i) {
    if (!refs[i]) continue;
    for (std::size_t s = 0; s < cfg.sets.size(); ++s) {
      const std::string file = "convergence_" + nu_tag(cfg.nu[i]) + "_" + cfg.sets[s].label + ".csv";
      Csv csv(out / file, {"t", "elements", "dofs", "rel_l2", "rel_h1", "rate_l2", "rate_h1"});
      json summary{{"nu", cfg.nu[i]}, {"set", cfg.sets[s].label}, {"file", file}, {"rates", json::array()}};
      for (double t : snaps) {
        std::vector<std::pair<std::size_t, ErrorSample>> rows;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
          if (jobs[j].nu != i || jobs[j].set != s) continue;
          for (const auto &e : results[j].snapshot_errors) {
            if (std::abs(e.time - t) <= 1e-9 * std::max(1.0, t)) rows.push_back({cfg.grids[jobs[j].grid], e});
          }
        }
        std::sort(rows.begin(), rows.end(), [](const auto &a, const auto &b) { return a.second.dofs < b.second.dofs; });
        std::vector<ErrorSample> samples;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          samples.push_back(rows[k].second);
          ConvergenceRates local;
          if (k > 0 && rows[k - 1].second.dofs != rows[k].second.dofs) {
            local = convergence_rate({rows[k - 1].second, rows[k].second});
          }
          const ErrorSample &e = rows[k].second;
          csv.row({format_double(t), std::to_string(rows[k].first), std::to_string(e.dofs), format_double(e.rel_l2),
                   format_double(e.rel_h1), rate_field(local.l2), rate_field(local.h1)});
        }
        if (samples.size() >= 2) {
          const ConvergenceTable table = make_convergence_table(t, samples);
          summary["rates"].push_back({{"t", t},
                                      {"rate_l2", table.rates.l2 ? json(*table.rates.l2) : json(nullptr)},
                                      {"rate_h1", table.rates.h1 ? json(*table.rates.h1) : json(nullptr)}});
        }
      }
      tables.push_back(summary);
    }
  }

  manifest["references"] = ref_records;
  manifest["cells"] = cells;
  manifest["convergence"] = tables;
  manifest["errors"] = errors;
  manifest["status"] = ok ? "complete" : "partial";
  manifest["partial"] = !ok;
  manifest["wall_time_s"] = elapsed_since(t0);
  write_manifest(out, manifest);
  return {ok, manifest};
}

StudyResult write_references(const StudyConfig &cfg, const std::filesystem::path &out, const RunOptions &opts) {
  if (cfg.problem == ProblemKind::Riemann) return run_riemann_gallery(cfg, out);
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out);
  const std::vector<double> snaps = study_snapshot_times(cfg);
  std::vector<json> records(cfg.nu.size());
  parallel_for(cfg.nu.size(), opts.threads, [&](std::size_t i) {
    json rec{{"nu", cfg.nu[i]}};
    try {
      auto ref = build_reference(cfg, cfg.nu[i]);
      const std::string file = "reference_" + nu_tag(cfg.nu[i]) + ".csv";
      Csv csv(out / file, {"x", "t", "u"});
      for (double t : snaps) {
        for (int k = 0; k <= 1000; ++k) {
          const double x = k / 1000.0;
          csv.row({format_double(x), format_double(t), format_double(ref->value(x, t))});
        }
      }
      rec["metadata"] = ref->metadata();
      rec["file"] = file;
      rec["status"] = "complete";
    } catch (const std::exception &ex) {
      rec["status"] = "failed";
      rec["error"] = ex.what();
    }
    records[i] = rec;
  });
  bool ok = std::all_of(records.begin(), records.end(), [](const json &r) { return r["status"] == "complete"; });
  json manifest{{"config", to_json(cfg)},
                {"references", records},
                {"status", ok ? "complete" : "partial"},
                {"partial", !ok},
                {"wall_time_s", elapsed_since(t0)}};
  write_manifest(out, manifest);
  return {ok, manifest};
}

StudyResult run_riemann_gallery(const StudyConfig &cfg, const std::filesystem::path &out) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out);
  const RiemannConfig &rc = cfg.riemann;
  json entries = json::array();
  bool ok = true;
  for (double b : rc.b) {
    json rec{{"b", b}};
    try {
      InviscidSolution sol([b](double x) { return riemann_ic(b, x); }, rc.lo, rc.hi,
                           [](double x) { return x > 0.5 && x < 1.5 ? -2.0 : 0.0; });
      rec["breaking_time"] = sol.breaking_time() ? json(*sol.breaking_time()) : json(nullptr);
      rec["shock_location"] = sol.shock_location() ? json(*sol.shock_location()) : json(nullptr);
      rec["stationary"] = sol.stationary();
      const std::string file = "riemann_b-" + format_double(b) + ".csv";
      Csv csv(out / file, {"x", "t", "u"});
      json written = json::array(), skipped = json::array();
      for (double t : rc.times) {
        if (!sol.stationary() && sol.breaking_time() && t >= *sol.breaking_time()) {
          skipped.push_back(t);
          continue;
        }
        for (std::size_t k = 0; k < rc.points; ++k) {
          const double x = rc.lo + (rc.hi - rc.lo) * static_cast<double>(k) / static_cast<double>(rc.points - 1);
          csv.row({format_double(x), format_double(t), format_double(sol.value(x, t))});
        }
        written.push_back(t);
      }
      rec["file"] = file;
      rec["times"] = written;
      rec["skipped_times"] = skipped;
      if (!skipped.empty()) rec["note"] = "moving shock after the breaking time; only earlier times evaluated";
      rec["status"] = "complete";
    } catch (const std::exception &ex) {
      ok = false;
      rec["status"] = "failed";
      rec["error"] = ex.what();
    }
    entries.push_back(rec);
  }
  json manifest{{"config", to_json(cfg)},
                {"riemann", entries},
                {"status", ok ? "complete" : "partial"},
                {"partial", !ok},
                {"wall_time_s", elapsed_since(t0)}};
  write_manifest(out, manifest);
  return {ok, manifest};
}

} // namespace gfem
