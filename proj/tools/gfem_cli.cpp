#include "gfem/study.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

namespace {

struct Common {
  std::string config;
  std::string study;
  std::string out;
  bool paper_fidelity = false;
  std::size_t threads = 1;
};

void add_common(CLI::App *cmd, Common &c, bool with_out) {
  cmd->add_option("--config", c.config, "TOML or JSON config file");
  cmd->add_option("--study", c.study, "Built-in study name (overrides the config's 'study' key)");
  if (with_out) {
    cmd->add_option("--out", c.out, "Output directory (default: $GFEM_OUTPUT_DIR or ./out/<study>)");
    cmd->add_option("--threads", c.threads, "Worker threads for independent cells")->check(CLI::PositiveNumber);
  }
  cmd->add_flag("--paper-fidelity", c.paper_fidelity, "5000-element references, dt = 1/5000, grids up to 191");
}

nlohmann::json load(const Common &c) {
  nlohmann::json user = nlohmann::json::object();
  if (!c.config.empty()) user = gfem::load_config_file(c.config);
  if (!c.study.empty()) user["study"] = c.study;
  if (user.empty()) throw gfem::ConfigError({"give --config or --study"});
  return gfem::resolve_config(user, c.paper_fidelity);
}

std::filesystem::path out_dir(const Common &c, const gfem::StudyConfig &cfg) {
  if (!c.out.empty()) return c.out;
  if (const char *env = std::getenv("GFEM_OUTPUT_DIR")) return std::filesystem::path(env) / cfg.name;
  return std::filesystem::path("out") / cfg.name;
}

void print_error_record(const std::string &stage, const std::string &message) {
  std::cerr << nlohmann::json{{"status", "error"}, {"stage", stage}, {"message", message}}.dump() << '\n';
}

int report(const gfem::StudyResult &r, const std::filesystem::path &out) {
  std::cout << "status: " << r.manifest.value("status", std::string("unknown")) << "\n"
            << "output: " << out.string() << "\n";
  if (!r.ok) {
    for (const auto &e : r.manifest.value("errors", nlohmann::json::array())) std::cerr << e.dump() << '\n';
  }
  return r.ok ? 0 : 1;
}

void print_convergence(const gfem::StudyResult &r) {
  for (const auto &t : r.manifest.value("convergence", nlohmann::json::array())) {
    std::cout << "nu = " << t["nu"].get<double>() << ", set = " << t["set"].get<std::string>() << "\n";
    for (const auto &row : t["rates"]) {
      const auto show = [](const nlohmann::json &v) {
        std::ostringstream s;
        if (v.is_null()) s << "n/a";
        else s << std::fixed << std::setprecision(2) << v.get<double>();
        return s.str();
      };
      std::cout << "  t = " << std::setw(8) << row["t"].get<double>() << "  rate L2 " << show(row["rate_l2"])
                << "  rate H1 " << show(row["rate_h1"]) << "\n";
    }
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"GFEM solver for the 1D Burgers equation with convergence studies"};
  app.require_subcommand(1);

  Common run_opts, ref_opts, conv_opts, riemann_opts, validate_opts;
  auto *run = app.add_subcommand("run", "Run a study: solutions, error series, convergence tables");
  add_common(run, run_opts, true);
  auto *ref = app.add_subcommand("reference", "Write reference solutions as (x, t, u) CSV");
  add_common(ref, ref_opts, true);
  auto *conv = app.add_subcommand("convergence", "Run a study and print convergence rates");
  add_common(conv, conv_opts, true);
  auto *riemann = app.add_subcommand("riemann", "Characteristics solutions of the Riemann data");
  add_common(riemann, riemann_opts, true);
  auto *list = app.add_subcommand("list", "List built-in studies");
  auto *validate = app.add_subcommand("validate", "Check a config without running numerics");
  add_common(validate, validate_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto &s : gfem::list_studies()) std::cout << std::left << std::setw(22) << s.name << s.description << "\n";
      return 0;
    }
    if (*validate) {
      const auto doc = load(validate_opts);
      const auto rep = gfem::validate_config(doc);
      for (const auto &w : rep.warnings) std::cout << "warning: " << w << "\n";
      for (const auto &e : rep.errors) std::cout << "error: " << e << "\n";
      std::cout << (rep.ok ? "valid" : "invalid") << "\n";
      return rep.ok ? 0 : 2;
    }
    if (*riemann) {
      if (riemann_opts.config.empty() && riemann_opts.study.empty()) riemann_opts.study = "riemann-gallery";
      const auto cfg = gfem::parse_config(load(riemann_opts));
      const auto out = out_dir(riemann_opts, cfg);
      return report(gfem::run_riemann_gallery(cfg, out), out);
    }
    Common &c = *run ? run_opts : (*ref ? ref_opts : conv_opts);
    const auto cfg = gfem::parse_config(load(c));
    const auto out = out_dir(c, cfg);
    const gfem::RunOptions opts{c.threads};
    if (*ref) return report(gfem::write_references(cfg, out, opts), out);
    const auto result = gfem::run_study(cfg, out, opts);
    if (*conv) print_convergence(result);
    return report(result, out);
  } catch (const gfem::ConfigError &ex) {
    for (const auto &p : ex.problems()) print_error_record("config", p);
    return 2;
  } catch (const std::exception &ex) {
    print_error_record("run", ex.what());
    return 1;
  }
}
