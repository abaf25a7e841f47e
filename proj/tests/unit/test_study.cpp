#include "gfem/study.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace gfem;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("gfem_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_study() {
  return json{{"study", "example1-exp-gfem"},
              {"nu", {0.1}},
              {"grids", {5, 9}},
              {"time", {{"dt", 0.01}, {"t_end", 0.1}, {"snapshots", {0.0, 0.05, 0.1}}}},
              {"error", {{"series_dt", 0.05}, {"subintervals", 200}}}};
}

std::size_t space_size(const StudyConfig &cfg, const std::string &label, double nu, std::size_t n) {
  const auto it = std::find_if(cfg.sets.begin(), cfg.sets.end(), [&](const auto &s) { return s.label == label; });
  const Mesh1D mesh = build_uniform_mesh(n, 0.0, 1.0);
  return GfemSpace(mesh, resolve_rules(*it, cfg.problem, nu, mesh)).size();
}

} // namespace

TEST(Study, RegistryContents) {
  std::vector<std::string> names;
  for (const auto &s : list_studies()) names.push_back(s.name);
  for (const char *n : {"example1-fem", "example1-exp-gfem", "example1-disc-gfem", "example2-fem", "example2-ss-gfem",
                        "example2-ss-rho", "riemann-gallery"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    EXPECT_NO_THROW(parse_config(resolve_config({{"study", n}}))) << n;
  }
  EXPECT_THROW(builtin_study("nope"), std::invalid_argument);
}

TEST(Study, BuiltinEnrichmentSets) {
  const StudyConfig exp = parse_config(resolve_config({{"study", "example1-exp-gfem"}}));
  ASSERT_EQ(exp.sets.size(), 2u);
  EXPECT_FALSE(exp.sets[1].rules[0].rate.has_value());
  EXPECT_EQ(space_size(exp, "exp", 0.01, 11), 15u);
  const StudyConfig disc = parse_config(resolve_config({{"study", "example1-disc-gfem"}}));
  EXPECT_EQ(space_size(disc, "disc", 0.0, 11), 13u);
  const StudyConfig rho = parse_config(resolve_config({{"study", "example2-ss-rho"}}));
  ASSERT_EQ(rho.sets.size(), 5u);
  EXPECT_EQ(rho.sets[0].rules.size(), 1u);
  EXPECT_EQ(rho.sets[4].rules.size(), 4u);
  EXPECT_EQ(space_size(rho, "ss", 1.0 / 500, 11), 14u);
  const StudyConfig ss = parse_config(resolve_config({{"study", "example2-ss-gfem"}}));
  EXPECT_EQ(space_size(ss, "ss", 1.0 / 50, 11), 16u);
  EXPECT_DOUBLE_EQ(ss.t_end, 0.75);
}

TEST(Study, ExponentialRateFollowsData) {
  const StudyConfig cfg = parse_config(resolve_config({{"study", "example1-exp-gfem"}}));
  const Mesh1D mesh = build_uniform_mesh(11, 0.0, 1.0);
  const auto rules = resolve_rules(cfg.sets[1], cfg.problem, 0.01, mesh);
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_NEAR(std::get<Exponential>(rules[0].kind).rate, 100.0, 1e-6);
}

TEST(Study, ValidationRejections) {
  json overlap = {{"study", "example1-fem"}, {"boundary", {{"neumann", {1.0}}}}};
  ValidationReport r = validate_config(resolve_config(overlap));
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(std::any_of(r.errors.begin(), r.errors.end(),
                          [](const std::string &e) { return e.find("disjoint") != std::string::npos; }));
  json fourier = {{"study", "example1-fem"}, {"reference", {{"kind", "fourier"}}}};
  r = validate_config(resolve_config(fourier));
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(std::any_of(r.errors.begin(), r.errors.end(),
                          [](const std::string &e) { return e.find("nu = 0") != std::string::npos; }));
  r = validate_config(resolve_config({{"study", "example1-fem"}, {"grids", {11, -3}}, {"time", {{"dt", 0.3}}}}));
  EXPECT_FALSE(r.ok);
  EXPECT_GE(r.errors.size(), 2u);
  EXPECT_THROW(parse_config(resolve_config(overlap)), ConfigError);
}

TEST(Study, StabilityWarnings) {
  const ValidationReport r = validate_config(resolve_config({{"study", "example1-fem"}}));
  EXPECT_TRUE(r.ok);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Study, FractionStringsAndFiles) {
  const fs::path dir = scratch("files");
  {
    std::ofstream f(dir / "a.toml");
    f << "study = \"example1-fem\"\nnu = [\"1/100\", 0.5]\ngrids = [11]\n[time]\nsnapshots = [0, \"1/pi\"]\n";
  }
  {
    std::ofstream f(dir / "b.json");
    f << R"({"study": "example1-fem", "nu": ["1/100", 0.5], "grids": [11], "time": {"snapshots": [0, "1/pi"]}})";
  }
  const StudyConfig a = parse_config(resolve_config(load_config_file(dir / "a.toml")));
  const StudyConfig b = parse_config(resolve_config(load_config_file(dir / "b.json")));
  EXPECT_DOUBLE_EQ(a.nu[0], 0.01);
  EXPECT_EQ(to_json(a), to_json(b));
  const auto snaps = study_snapshot_times(a);
  ASSERT_EQ(snaps.size(), 2u);
  EXPECT_NEAR(snaps[1], 0.318, 1e-12);
  {
    std::ofstream f(dir / "bad.toml");
    f << "nu = [\n";
  }
  EXPECT_THROW(load_config_file(dir / "bad.toml"), ConfigError);
}

TEST(Study, ResolvedConfigRoundTrips) {
  const StudyConfig cfg = parse_config(resolve_config({{"study", "example2-ss-rho"}}));
  const json j = to_json(cfg);
  EXPECT_EQ(to_json(parse_config(j)), j);
  for (const char *key : {"reference", "error", "newton", "linear", "penalty", "quadrature", "boundary", "time"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Study, PaperFidelity) {
  const StudyConfig cfg = parse_config(resolve_config({{"study", "example1-fem"}}, true));
  EXPECT_EQ(cfg.reference.elements, 5000u);
  EXPECT_DOUBLE_EQ(cfg.dt, 2e-4);
  EXPECT_EQ(cfg.grids.back(), 191u);
}

TEST(Study, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678, 0.0}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.25), "0.25");
}

TEST(Study, RunWritesOutputsDeterministically) {
  const StudyConfig cfg = parse_config(resolve_config(small_study()));
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const StudyResult ra = run_study(cfg, a, {1});
  const StudyResult rb = run_study(cfg, b, {2});
  ASSERT_TRUE(ra.ok) << ra.manifest.dump(2);
  ASSERT_TRUE(rb.ok);
  EXPECT_EQ(ra.manifest["status"], "complete");
  EXPECT_EQ(ra.manifest["partial"], false);
  std::size_t csv = 0;
  for (const auto &entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++csv;
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
  }
  // 2 sets x 2 grids x (solution + errors) + 2 convergence tables.
  EXPECT_EQ(csv, 10u);
  EXPECT_TRUE(fs::exists(a / "manifest.json"));
  const json m = json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(m["cells"].size(), 4u);
  EXPECT_EQ(m["references"][0]["kind"], "fourier");
  const std::string header = slurp(a / "errors_nu-0.1_exp_n9.csv").substr(0, 22);
  EXPECT_EQ(header, "t,dofs,rel_l2,rel_h1\n0");
}

TEST(Study, FailedCellsKeepPartialOutputs) {
  json doc = small_study();
  doc["newton"] = {{"max_iters", 1}, {"tol", 1e-300}};
  const StudyConfig cfg = parse_config(resolve_config(doc));
  const fs::path dir = scratch("run_fail");
  const StudyResult r = run_study(cfg, dir);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.manifest["status"], "partial");
  EXPECT_EQ(r.manifest["partial"], true);
  EXPECT_FALSE(r.manifest["errors"].empty());
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(Study, ReferencesAndRiemannGallery) {
  json doc = small_study();
  const StudyConfig cfg = parse_config(resolve_config(doc));
  const fs::path dir = scratch("refs");
  ASSERT_TRUE(write_references(cfg, dir).ok);
  EXPECT_TRUE(fs::exists(dir / "reference_nu-0.1.csv"));

  const StudyConfig gallery = parse_config(resolve_config({{"study", "riemann-gallery"}}));
  const fs::path gdir = scratch("gallery");
  const StudyResult g = run_riemann_gallery(gallery, gdir);
  ASSERT_TRUE(g.ok) << g.manifest.dump(2);
  for (const char *b : {"-1.25", "-1", "0", "0.5", "1", "1.25"}) {
    EXPECT_TRUE(fs::exists(gdir / (std::string("riemann_b-") + b + ".csv"))) << b;
  }
  // Moving cases stop before the breaking time 1/2; b = 0 covers every time.
  const std::string moving = slurp(gdir / "riemann_b-1.csv");
  const std::string centred = slurp(gdir / "riemann_b-0.csv");
  EXPECT_EQ(moving.find(",0.75,"), std::string::npos);
  EXPECT_NE(centred.find(",0.75,"), std::string::npos);
}

TEST(Study, AutoReferenceFallsBackForSmallViscosity) {
  const StudyConfig cfg = parse_config(resolve_config({{"study", "example1-exp-gfem"}, {"reference", {{"elements", 100}}}}));
  std::string note;
  const auto ref = build_reference(cfg, 0.01, &note);
  EXPECT_EQ(ref->kind(), "fine_fem");
  EXPECT_NE(note.find("fell back"), std::string::npos);
  const StudyConfig inviscid = parse_config(resolve_config({{"study", "example1-disc-gfem"}}));
  EXPECT_EQ(build_reference(inviscid, 0.0)->kind(), "characteristics");
}
