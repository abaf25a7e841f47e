#include "gfem/study.hpp"

#include <toml.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace gfem {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string> &items, const std::string &sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

json toml_to_json(const toml::node &node) {
  json out;
  node.visit([&out](auto &&n) {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, toml::table>) {
      out = json::object();
      for (auto &&[k, v] : n) out[std::string(k.str())] = toml_to_json(v);
    } else if constexpr (std::is_same_v<T, toml::array>) {
      out = json::array();
      for (auto &&v : n) out.push_back(toml_to_json(v));
    } else if constexpr (std::is_same_v<T, toml::value<std::string>>) {
      out = n.get();
    } else if constexpr (std::is_same_v<T, toml::value<int64_t>>) {
      out = n.get();
    } else if constexpr (std::is_same_v<T, toml::value<double>>) {
      out = n.get();
    } else if constexpr (std::is_same_v<T, toml::value<bool>>) {
      out = n.get();
    } else {
      throw std::runtime_error("config: dates and times are not supported");
    }
  });
  return out;
}

/// Numbers may be written as literals or as "p/q" strings, q possibly "pi".
std::optional<double> to_number(const json &v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) return std::nullopt;
  const std::string s = v.get<std::string>();
  const auto parse = [](std::string_view t) -> std::optional<double> {
    while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
    while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
    if (t == "pi") return std::numbers::pi;
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), d);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return d;
  };
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse(s);
  const auto num = parse(std::string_view(s).substr(0, slash));
  const auto den = parse(std::string_view(s).substr(slash + 1));
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

class Reader {
public:
  explicit Reader(const json &doc) : doc_(doc) {}

  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  const json *find(const std::string &section, const std::string &key) const {
    const json *node = &doc_;
    if (!section.empty()) {
      auto it = doc_.find(section);
      if (it == doc_.end()) return nullptr;
      if (!it->is_object()) return nullptr;
      node = &*it;
    }
    auto it = node->find(key);
    return it == node->end() ? nullptr : &*it;
  }

  static std::string path(const std::string &section, const std::string &key) {
    return section.empty() ? key : section + "." + key;
  }

  double number(const std::string &section, const std::string &key, double fallback) {
    const json *v = find(section, key);
    if (!v) return fallback;
    if (auto d = to_number(*v); d && std::isfinite(*d)) return *d;
    errors.push_back(path(section, key) + ": expected a number");
    return fallback;
  }

  std::size_t count(const std::string &section, const std::string &key, std::size_t fallback) {
    const json *v = find(section, key);
    if (!v) return fallback;
    if (v->is_number_integer() && v->get<long long>() >= 0) return v->get<std::size_t>();
    errors.push_back(path(section, key) + ": expected a non-negative integer");
    return fallback;
  }

  bool boolean(const std::string &section, const std::string &key, bool fallback) {
    const json *v = find(section, key);
    if (!v) return fallback;
    if (v->is_boolean()) return v->get<bool>();
    errors.push_back(path(section, key) + ": expected true or false");
    return fallback;
  }

  std::string text(const std::string &section, const std::string &key, const std::string &fallback) {
    const json *v = find(section, key);
    if (!v) return fallback;
    if (v->is_string()) return v->get<std::string>();
    errors.push_back(path(section, key) + ": expected a string");
    return fallback;
  }

  std::vector<double> numbers(const std::string &section, const std::string &key,
                              const std::vector<double> &fallback) {
    const json *v = find(section, key);
    if (!v) return fallback;
    if (!v->is_array()) {
      if (auto d = to_number(*v)) return {*d};
      errors.push_back(path(section, key) + ": expected a list of numbers");
      return fallback;
    }
    std::vector<double> out;
    for (const auto &item : *v) {
      auto d = to_number(item);
      if (!d || !std::isfinite(*d)) {
        errors.push_back(path(section, key) + ": expected a list of numbers");
        return fallback;
      }
      out.push_back(*d);
    }
    return out;
  }

private:
  const json &doc_;
};

struct Builtin {
  const char *name;
  const char *description;
  json (*make)();
};

json boundary_layer_base() {
  return {{"problem", "boundary-layer"},
          {"grids", {11, 23, 47, 95}},
          {"time", {{"dt", 1e-3}, {"t_end", 1.0}, {"snapshots", {0.0, 0.25, "1/pi", 0.5, 0.75, 1.0}}}},
          {"reference", {{"kind", "auto"}}}};
}

json shock_base() {
  return {{"problem", "shock"},
          {"nu", {"1/50", "1/100", "1/500", "1/1000"}},
          {"grids", {11, 23, 47, 95}},
          {"time", {{"dt", 1e-3}, {"t_end", 0.75}, {"snapshots", {0.0, 0.25, 0.3, 0.35, 0.5, 0.75}}}},
          {"reference", {{"kind", "fine-fem"}}}};
}

const json kFemSet = {{"label", "fem"}, {"rules", json::array()}};
const json kSteadyRule = {{"type", "steady"}};

json tanh_rule(const char *rho) { return {{"type", "tanh"}, {"rho", rho}, {"center", 0.5}}; }

const std::vector<Builtin> &builtins() {
  static const std::vector<Builtin> list = {
      {"example1-fem", "Boundary layer, sin(pi x) data, linear FEM for nu in {1/10, 1/50, 1/100, 0}",
       [] {
         json j = boundary_layer_base();
         j["nu"] = {"1/10", "1/50", "1/100", 0.0};
         j["sets"] = {kFemSet};
         return j;
       }},
      {"example1-exp-gfem", "Boundary layer, nu = 1/100: FEM and GFEM with exp(max|u_ic| x / nu) on [0.8, 1]",
       [] {
         json j = boundary_layer_base();
         j["nu"] = {"1/100"};
         j["sets"] = {kFemSet,
                      {{"label", "exp"},
                       {"rules", {{{"type", "exponential"}, {"rate", "auto"}, {"local", {0.8, 1.0}}}}}}};
         return j;
       }},
      {"example1-disc-gfem", "Boundary layer, nu = 0: FEM and GFEM with a Heaviside enrichment at x = 1",
       [] {
         json j = boundary_layer_base();
         j["nu"] = {0.0};
         j["sets"] = {kFemSet, {{"label", "disc"}, {"rules", {{{"type", "heaviside"}, {"side", "right"}}}}}};
         return j;
       }},
      {"example2-fem", "Shock formation, cos(pi x) data, linear FEM for nu in {1/50, 1/100, 1/500, 1/1000}",
       [] {
         json j = shock_base();
         j["sets"] = {kFemSet};
         return j;
       }},
      {"example2-ss-gfem", "Shock formation: FEM and GFEM enriched with the steady-state shock profile",
       [] {
         json j = shock_base();
         j["sets"] = {kFemSet, {{"label", "ss"}, {"rules", {kSteadyRule}}}};
         return j;
       }},
      {"example2-ss-rho", "Shock formation, nu = 1/500: steady-state enrichment plus tanh shocks rho in {1/50, 1/100, 1/200}",
       [] {
         json j = shock_base();
         j["nu"] = {"1/500"};
         j["sets"] = {
             {{"label", "ss"}, {"rules", {kSteadyRule}}},
             {{"label", "ss-rho50"}, {"rules", {kSteadyRule, tanh_rule("1/50")}}},
             {{"label", "ss-rho100"}, {"rules", {kSteadyRule, tanh_rule("1/100")}}},
             {{"label", "ss-rho200"}, {"rules", {kSteadyRule, tanh_rule("1/200")}}},
             {{"label", "ss-rho-all"},
              {"rules", {kSteadyRule, tanh_rule("1/50"), tanh_rule("1/100"), tanh_rule("1/200")}}}};
         return j;
       }},
      {"riemann-gallery", "Inviscid Riemann data b in {-1.25, -1, 0, 0.5, 1, 1.25} by characteristics",
       [] {
         return json{{"problem", "riemann"},
                     {"riemann",
                      {{"b", {-1.25, -1.0, 0.0, 0.5, 1.0, 1.25}},
                       {"lo", 0.0},
                       {"hi", 2.0},
                       {"points", 401},
                       {"times", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0}}}}};
       }},
  };
  return list;
}

ProblemKind parse_problem(const std::string &s, std::vector<std::string> &errors) {
  if (s == "boundary-layer") return ProblemKind::BoundaryLayer;
  if (s == "shock") return ProblemKind::Shock;
  if (s == "riemann") return ProblemKind::Riemann;
  errors.push_back("problem: unknown problem '" + s + "' (boundary-layer, shock, riemann)");
  return ProblemKind::BoundaryLayer;
}

std::string problem_name(ProblemKind k) {
  switch (k) {
  case ProblemKind::BoundaryLayer: return "boundary-layer";
  case ProblemKind::Shock: return "shock";
  case ProblemKind::Riemann: return "riemann";
  }
  return "";
}

std::string reference_name(ReferenceKind k) {
  switch (k) {
  case ReferenceKind::Auto: return "auto";
  case ReferenceKind::Fourier: return "fourier";
  case ReferenceKind::Characteristics: return "characteristics";
  case ReferenceKind::FineFem: return "fine-fem";
  case ReferenceKind::Steady: return "steady";
  }
  return "";
}

bool divides(double big, double small) {
  const double r = big / small;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r) && std::round(r) >= 1.0;
}

bool safe_label(const std::string &s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

// Largest nu for which the steady-state constant is bracketed by [1e-6, 2]:
// 2 tanh(1 / (2 nu)) = 1.
const double kSteadyNuLimit = 1.0 / (2.0 * std::atanh(0.5));

EnrichmentSpec parse_rule(const json &r, const std::string &where, std::vector<std::string> &errors) {
  EnrichmentSpec spec;
  if (!r.is_object() || !r.contains("type") || !r["type"].is_string()) {
    errors.push_back(where + ": rule needs a string 'type'");
    return spec;
  }
  spec.type = r["type"].get<std::string>();
  const auto num = [&](const char *key, double fallback) {
    if (!r.contains(key)) return fallback;
    if (auto d = to_number(r[key]); d && std::isfinite(*d)) return *d;
    errors.push_back(where + "." + key + ": expected a number");
    return fallback;
  };
  if (spec.type == "exponential") {
    if (r.contains("rate") && !(r["rate"].is_string() && r["rate"] == "auto")) {
      spec.rate = num("rate", 0.0);
      if (*spec.rate == 0.0) errors.push_back(where + ".rate: must be nonzero");
    }
    if (r.contains("local")) {
      const json &l = r["local"];
      std::optional<double> lo, hi;
      if (l.is_array() && l.size() == 2) {
        lo = to_number(l[0]);
        hi = to_number(l[1]);
      }
      if (!lo || !hi || !(*lo < *hi)) {
        errors.push_back(where + ".local: expected [lo, hi] with lo < hi");
      } else {
        spec.local_lo = *lo;
        spec.local_hi = *hi;
      }
    }
  } else if (spec.type == "heaviside") {
    const std::string side = r.value("side", std::string("right"));
    if (side == "right") spec.side = BoundarySide::Right;
    else if (side == "left") spec.side = BoundarySide::Left;
    else errors.push_back(where + ".side: expected 'left' or 'right'");
  } else if (spec.type == "tanh") {
    spec.rho = num("rho", 0.0);
    spec.center = num("center", 0.5);
    if (!(spec.rho > 0.0)) errors.push_back(where + ".rho: must be positive");
  } else if (spec.type != "steady") {
    errors.push_back(where + ".type: unknown enrichment '" + spec.type +
                     "' (exponential, heaviside, steady, tanh)");
  }
  return spec;
}

json rule_to_json(const EnrichmentSpec &s) {
  json j{{"type", s.type}};
  if (s.type == "exponential") {
    j["rate"] = s.rate ? json(*s.rate) : json("auto");
    j["local"] = {s.local_lo, s.local_hi};
  } else if (s.type == "heaviside") {
    j["side"] = s.side == BoundarySide::Right ? "right" : "left";
  } else if (s.type == "tanh") {
    j["rho"] = s.rho;
    j["center"] = s.center;
  }
  return j;
}

StudyConfig parse_impl(const json &doc, Reader &rd) {
  auto &errors = rd.errors;
  StudyConfig cfg;
  if (!doc.is_object()) {
    errors.push_back("config: top level must be a table/object");
    return cfg;
  }
  cfg.name = rd.text("", "name", rd.text("", "study", "custom"));
  cfg.description = rd.text("", "description", "");
  cfg.problem = parse_problem(rd.text("", "problem", "boundary-layer"), errors);

  if (cfg.problem == ProblemKind::Riemann) {
    RiemannConfig &r = cfg.riemann;
    r.b = rd.numbers("riemann", "b", {});
    r.lo = rd.number("riemann", "lo", 0.0);
    r.hi = rd.number("riemann", "hi", 2.0);
    r.points = rd.count("riemann", "points", 401);
    r.times = rd.numbers("riemann", "times", {0.0, 0.25, 0.5});
    if (r.b.empty()) errors.push_back("riemann.b: at least one translation value required");
    if (!(r.lo < r.hi)) errors.push_back("riemann: requires lo < hi");
    if (r.points < 2) errors.push_back("riemann.points: at least 2");
    for (double t : r.times) {
      if (t < 0.0) errors.push_back("riemann.times: times must be non-negative");
    }
    return cfg;
  }

  cfg.nu = rd.numbers("", "nu", {});
  if (cfg.nu.empty()) errors.push_back("nu: at least one viscosity required");
  for (double nu : cfg.nu) {
    if (!(nu >= 0.0)) errors.push_back("nu: viscosities must be non-negative");
  }
  if (const json *g = rd.find("", "grids")) {
    if (!g->is_array() || g->empty()) {
      errors.push_back("grids: expected a non-empty list of element counts");
    } else {
      for (const auto &n : *g) {
        if (n.is_number_integer() && n.get<long long>() >= 1) cfg.grids.push_back(n.get<std::size_t>());
        else errors.push_back("grids: element counts must be positive integers");
      }
    }
  } else {
    errors.push_back("grids: missing");
  }
  std::set<std::size_t> seen_grids(cfg.grids.begin(), cfg.grids.end());
  if (seen_grids.size() != cfg.grids.size()) errors.push_back("grids: duplicate element counts");
  std::sort(cfg.grids.begin(), cfg.grids.end());

  cfg.dt = rd.number("time", "dt", 1e-3);
  cfg.t_end = rd.number("time", "t_end", 1.0);
  cfg.snapshots = rd.numbers("time", "snapshots", {0.0, cfg.t_end});
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) {
    errors.push_back("time: dt and t_end must be positive");
  } else if (!divides(cfg.t_end, cfg.dt)) {
    errors.push_back("time: dt must divide t_end");
  }
  for (double t : cfg.snapshots) {
    if (t < 0.0 || t > cfg.t_end + 1e-12) errors.push_back("time.snapshots: " + format_double(t) + " outside [0, t_end]");
  }

  const std::string scaling = rd.text("enrichment", "scaling", "patch-local");
  if (scaling == "patch-local") cfg.scaling = EnrichmentScaling::PatchLocal;
  else if (scaling == "raw") cfg.scaling = EnrichmentScaling::Raw;
  else errors.push_back("enrichment.scaling: expected 'patch-local' or 'raw'");
  cfg.exclude_boundary_nodes = rd.boolean("enrichment", "exclude_boundary_nodes", false);

  if (const json *sets = rd.find("", "sets")) {
    if (!sets->is_array() || sets->empty()) errors.push_back("sets: expected a non-empty list");
    std::set<std::string> labels;
    for (std::size_t i = 0; sets->is_array() && i < sets->size(); ++i) {
      const json &s = (*sets)[i];
      const std::string where = "sets[" + std::to_string(i) + "]";
      EnrichmentSet set;
      if (!s.is_object() || !s.contains("label") || !s["label"].is_string()) {
        errors.push_back(where + ": needs a string 'label'");
        continue;
      }
      set.label = s["label"].get<std::string>();
      if (!safe_label(set.label)) errors.push_back(where + ".label: use letters, digits, '-', '_' or '.'");
      if (!labels.insert(set.label).second) errors.push_back(where + ".label: duplicate label '" + set.label + "'");
      if (s.contains("rules")) {
        if (!s["rules"].is_array()) {
          errors.push_back(where + ".rules: expected a list");
        } else {
          for (std::size_t k = 0; k < s["rules"].size(); ++k) {
            set.rules.push_back(parse_rule(s["rules"][k], where + ".rules[" + std::to_string(k) + "]", errors));
          }
        }
      }
      cfg.sets.push_back(std::move(set));
    }
  } else {
    cfg.sets.push_back({"fem", {}});
  }

  const std::string ref = rd.text("reference", "kind", "auto");
  if (ref == "auto") cfg.reference.kind = ReferenceKind::Auto;
  else if (ref == "fourier") cfg.reference.kind = ReferenceKind::Fourier;
  else if (ref == "characteristics") cfg.reference.kind = ReferenceKind::Characteristics;
  else if (ref == "fine-fem") cfg.reference.kind = ReferenceKind::FineFem;
  else if (ref == "steady") cfg.reference.kind = ReferenceKind::Steady;
  else errors.push_back("reference.kind: unknown kind '" + ref + "'");
  cfg.reference.elements = rd.count("reference", "elements", 1000);
  cfg.reference.dt = rd.number("reference", "dt", cfg.dt);
  if (cfg.reference.elements < 1) errors.push_back("reference.elements: must be positive");
  if (!(cfg.reference.dt > 0.0)) errors.push_back("reference.dt: must be positive");

  cfg.error.subintervals = rd.count("error", "subintervals", 2000);
  cfg.error.points = rd.count("error", "points", 4);
  cfg.error.series_dt = rd.number("error", "series_dt", 0.01);
  const std::string h1 = rd.text("error", "h1", "full");
  if (h1 == "full") cfg.error.h1 = H1Convention::Full;
  else if (h1 == "seminorm") cfg.error.h1 = H1Convention::Seminorm;
  else errors.push_back("error.h1: expected 'full' or 'seminorm'");
  if (cfg.error.subintervals < 1) errors.push_back("error.subintervals: must be positive");
  if (cfg.error.points < 1 || cfg.error.points > kMaxGaussPoints) errors.push_back("error.points: must be in [1, 64]");
  if (!(cfg.error.series_dt > 0.0)) errors.push_back("error.series_dt: must be positive");

  SolverOptions &so = cfg.solver;
  so.newton.tol = rd.number("newton", "tol", so.newton.tol);
  so.newton.max_iters = rd.count("newton", "max_iters", so.newton.max_iters);
  so.newton.require_convergence = rd.boolean("newton", "require_convergence", so.newton.require_convergence);
  so.linear.perturbation = rd.number("linear", "perturbation", so.linear.perturbation);
  so.linear.criterion = rd.number("linear", "criterion", so.linear.criterion);
  so.linear.max_refinements = rd.count("linear", "max_refinements", so.linear.max_refinements);
  so.beta_scale = rd.number("penalty", "beta_scale", so.beta_scale);
  if (const json *q = rd.find("quadrature", "points"); q && !(q->is_string() && *q == "auto")) {
    so.quadrature_points = rd.count("quadrature", "points", 0);
    if (so.quadrature_points < 1 || so.quadrature_points > kMaxGaussPoints) {
      errors.push_back("quadrature.points: must be 'auto' or an integer in [1, 64]");
    }
  }
  if (!(so.newton.tol > 0.0) || so.newton.max_iters < 1) errors.push_back("newton: tol > 0 and max_iters >= 1 required");
  if (!(so.linear.perturbation > 0.0) || !(so.linear.criterion > 0.0)) {
    errors.push_back("linear: perturbation and criterion must be positive");
  }
  if (!(so.beta_scale > 0.0)) errors.push_back("penalty.beta_scale: must be positive");

  cfg.dirichlet = rd.numbers("boundary", "dirichlet", {0.0, 1.0});
  cfg.neumann = rd.numbers("boundary", "neumann", {});
  for (double x : cfg.dirichlet) {
    if (x != 0.0 && x != 1.0) errors.push_back("boundary.dirichlet: points must be domain ends 0 or 1");
  }
  for (double x : cfg.neumann) {
    if (x != 0.0 && x != 1.0) errors.push_back("boundary.neumann: points must be domain ends 0 or 1");
    if (std::find(cfg.dirichlet.begin(), cfg.dirichlet.end(), x) != cfg.dirichlet.end()) {
      errors.push_back("boundary: point x = " + format_double(x) +
                       " is both Dirichlet and Neumann; the boundaries must be disjoint");
    }
  }
  cfg.points_per_element = rd.count("output", "points_per_element", 10);
  if (cfg.points_per_element < 1) errors.push_back("output.points_per_element: must be positive");

  // Cross-field checks.
  for (double nu : cfg.nu) {
    if (!(nu >= 0.0)) continue;
    ReferenceKind kind = cfg.reference.kind;
    if (kind == ReferenceKind::Auto) {
      kind = nu == 0.0 ? ReferenceKind::Characteristics
                       : (cfg.problem == ProblemKind::BoundaryLayer ? ReferenceKind::Fourier : ReferenceKind::FineFem);
    }
    const std::string at = " (nu = " + format_double(nu) + ")";
    if (kind == ReferenceKind::Fourier) {
      if (nu == 0.0) errors.push_back("reference: the Fourier series is undefined for nu = 0" + at);
      if (cfg.problem != ProblemKind::BoundaryLayer) {
        errors.push_back("reference: the Fourier solution exists only for the boundary-layer problem");
      }
    }
    if (kind == ReferenceKind::FineFem) {
      if (nu == 0.0) errors.push_back("reference: fine FEM does not converge for nu = 0; use characteristics" + at);
      if (cfg.reference.dt > 0.0 && cfg.dt > 0.0 && !divides(cfg.dt, cfg.reference.dt)) {
        errors.push_back("reference.dt: must divide time.dt so snapshot times coincide");
      }
    }
    if (kind == ReferenceKind::Characteristics && nu != 0.0) {
      errors.push_back("reference: characteristics solve the inviscid equation only" + at);
    }
    if (kind == ReferenceKind::Steady) {
      if (cfg.problem != ProblemKind::Shock) errors.push_back("reference: steady profile exists only for the shock problem");
      if (!(nu > 0.0 && nu < kSteadyNuLimit)) errors.push_back("reference: steady profile needs 0 < nu < " + format_double(kSteadyNuLimit) + at);
    }
    for (const auto &set : cfg.sets) {
      for (const auto &r : set.rules) {
        if (r.type == "exponential" && !r.rate && nu == 0.0) {
          errors.push_back("sets." + set.label + ": automatic exponential rate max|u_ic|/nu undefined for nu = 0");
        }
        if (r.type == "steady" && !(nu > 0.0 && nu < kSteadyNuLimit)) {
          errors.push_back("sets." + set.label + ": steady enrichment needs 0 < nu < " + format_double(kSteadyNuLimit) + at);
        }
      }
    }
    if (nu > 0.0 && !cfg.grids.empty()) {
      const double limit = 2.0 * nu;  // max|u_ic| = 1 for both problems
      std::vector<std::string> coarse;
      for (std::size_t n : cfg.grids) {
        if (1.0 / static_cast<double>(n) > limit) coarse.push_back(std::to_string(n));
      }
      if (!coarse.empty()) {
        rd.warnings.push_back("grids {" + join(coarse, ", ") + "} have h above the stability limit 2 nu / max|u_ic| = " +
                              format_double(limit) + at + "; linear FEM may oscillate");
      }
    }
  }
  return cfg;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config: " + join(problems, "; ")), problems_(std::move(problems)) {}

std::vector<StudyInfo> list_studies() {
  std::vector<StudyInfo> out;
  for (const auto &b : builtins()) out.push_back({b.name, b.description});
  return out;
}

json builtin_study(const std::string &name) {
  for (const auto &b : builtins()) {
    if (name == b.name) {
      json j = b.make();
      j["name"] = b.name;
      j["description"] = b.description;
      return j;
    }
  }
  throw std::invalid_argument("unknown study '" + name + "'");
}

json load_config_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.extension() == ".json") {
    try {
      return json::parse(text);
    } catch (const json::parse_error &ex) {
      throw ConfigError({path.string() + ": " + ex.what()});
    }
  }
  try {
    const toml::table tbl = toml::parse(text, path.string());
    return toml_to_json(tbl);
  } catch (const toml::parse_error &ex) {
    std::ostringstream msg;
    msg << path.string() << ": " << ex.description() << " (line " << ex.source().begin.line << ")";
    throw ConfigError({msg.str()});
  }
}

json resolve_config(const json &user, bool paper_fidelity) {
  json doc = json::object();
  if (user.contains("study")) {
    if (!user["study"].is_string()) throw ConfigError({"study: expected a built-in study name"});
    try {
      doc = builtin_study(user["study"].get<std::string>());
    } catch (const std::invalid_argument &ex) {
      throw ConfigError({std::string("study: ") + ex.what()});
    }
  }
  doc.merge_patch(user);
  if (paper_fidelity && doc.value("problem", std::string("boundary-layer")) != "riemann") {
    doc["reference"]["elements"] = 5000;
    doc["reference"]["dt"] = 2e-4;
    doc["time"]["dt"] = 2e-4;
    if (doc.contains("grids") && doc["grids"].is_array()) {
      bool has = false;
      for (const auto &g : doc["grids"]) has = has || g == 191;
      if (!has) doc["grids"].push_back(191);
    }
  }
  return doc;
}

StudyConfig parse_config(const json &doc) {
  Reader rd(doc);
  StudyConfig cfg = parse_impl(doc, rd);
  if (!rd.errors.empty()) throw ConfigError(rd.errors);
  return cfg;
}

ValidationReport validate_config(const json &doc) {
  Reader rd(doc);
  (void)parse_impl(doc, rd);
  return {rd.errors.empty(), rd.errors, rd.warnings};
}

json to_json(const StudyConfig &cfg) {
  json j{{"name", cfg.name}, {"description", cfg.description}, {"problem", problem_name(cfg.problem)}};
  if (cfg.problem == ProblemKind::Riemann) {
    j["riemann"] = {{"b", cfg.riemann.b},
                    {"lo", cfg.riemann.lo},
                    {"hi", cfg.riemann.hi},
                    {"points", cfg.riemann.points},
                    {"times", cfg.riemann.times}};
    return j;
  }
  j["nu"] = cfg.nu;
  j["grids"] = cfg.grids;
  j["time"] = {{"dt", cfg.dt}, {"t_end", cfg.t_end}, {"snapshots", cfg.snapshots}};
  json sets = json::array();
  for (const auto &s : cfg.sets) {
    json rules = json::array();
    for (const auto &r : s.rules) rules.push_back(rule_to_json(r));
    sets.push_back({{"label", s.label}, {"rules", rules}});
  }
  j["sets"] = sets;
  j["enrichment"] = {{"scaling", cfg.scaling == EnrichmentScaling::PatchLocal ? "patch-local" : "raw"},
                     {"exclude_boundary_nodes", cfg.exclude_boundary_nodes}};
  j["reference"] = {{"kind", reference_name(cfg.reference.kind)},
                    {"elements", cfg.reference.elements},
                    {"dt", cfg.reference.dt}};
  j["error"] = {{"subintervals", cfg.error.subintervals},
                {"points", cfg.error.points},
                {"h1", cfg.error.h1 == H1Convention::Full ? "full" : "seminorm"},
                {"series_dt", cfg.error.series_dt}};
  j["newton"] = {{"tol", cfg.solver.newton.tol},
                 {"max_iters", cfg.solver.newton.max_iters},
                 {"require_convergence", cfg.solver.newton.require_convergence}};
  j["linear"] = {{"perturbation", cfg.solver.linear.perturbation},
                 {"criterion", cfg.solver.linear.criterion},
                 {"max_refinements", cfg.solver.linear.max_refinements}};
  j["penalty"] = {{"beta_scale", cfg.solver.beta_scale}};
  j["quadrature"] = {{"points", cfg.solver.quadrature_points == 0 ? json("auto") : json(cfg.solver.quadrature_points)}};
  j["boundary"] = {{"dirichlet", cfg.dirichlet}, {"neumann", cfg.neumann}};
  j["output"] = {{"points_per_element", cfg.points_per_element}};
  return j;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace gfem
