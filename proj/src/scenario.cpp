#include "fissura/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "fissura/affine.hpp"
#include "fissura/recovery.hpp"
#include "fissura/vtk_io.hpp"

namespace fissura {

namespace pt = boost::property_tree;

namespace {

const std::map<ScenarioKind, std::string> kScenarioNames = {
    {ScenarioKind::Tension, "tension"},
    {ScenarioKind::Compression, "compression"},
    {ScenarioKind::ShearPatch, "shear_patch"},
    {ScenarioKind::PrecrackedPlate, "precracked_plate"},
    {ScenarioKind::Calibration, "calibration"},
    {ScenarioKind::RecoveryCheck, "recovery_check"},
    {ScenarioKind::LemmaCheck, "lemma_check"},
};

const std::set<std::string> kKnownKeys = {
    "scenario.name",
    "grid.nx", "grid.ny", "grid.lx", "grid.ly",
    "model.variant", "model.mu", "model.lambda", "model.k", "model.Gc", "model.eps", "model.eta", "model.linf_bound",
    "load.t",
    "solver.tol_grad", "solver.tol_energy", "solver.tol_dv", "solver.max_outer", "solver.max_newton",
    "solver.cg_tol", "solver.cg_max_iter", "solver.linear",
    "notch.enabled", "notch.x0", "notch.y0", "notch.x1", "notch.y1", "notch.pinned",
    "recovery.eps",
    "lemma.trials", "lemma.samples", "lemma.p", "lemma.seed",
    "output.dir", "output.write_fields",
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(x))
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  return x;
}

long to_integer(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  long x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(key, "expected an integer, got '" + text + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

bool solves_fields(ScenarioKind k) {
  return k == ScenarioKind::Tension || k == ScenarioKind::Compression || k == ScenarioKind::ShearPatch ||
         k == ScenarioKind::PrecrackedPlate;
}

ScenarioConfig build_config(const pt::ptree& tree) {
  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "key outside of any section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!kKnownKeys.count(full)) throw ConfigError(full, "unknown key");
      kv[full] = value.data();
    }
  }
  auto has = [&](const std::string& k) { return kv.count(k) != 0; };

  ScenarioConfig c;
  if (!has("scenario.name")) throw ConfigError("scenario.name", "missing");
  try {
    c.kind = parse_scenario(trim(kv["scenario.name"]));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario.name", e.what());
  }

  if (c.kind == ScenarioKind::PrecrackedPlate) {
    c.notch.enabled = true;
    c.loads = {0.5};
  }
  if (c.kind == ScenarioKind::Compression) c.loads = {0.5};

  if (has("grid.nx")) c.nx = static_cast<int>(to_integer("grid.nx", kv["grid.nx"]));
  if (has("grid.ny")) c.ny = static_cast<int>(to_integer("grid.ny", kv["grid.ny"]));
  if (has("grid.lx")) c.lx = to_double("grid.lx", kv["grid.lx"]);
  if (has("grid.ly")) c.ly = to_double("grid.ly", kv["grid.ly"]);
  if (c.nx < 2) throw ConfigError("grid.nx", "must be at least 2");
  if (c.ny < 2) throw ConfigError("grid.ny", "must be at least 2");
  if (!(c.lx > 0.0)) throw ConfigError("grid.lx", "must be positive");
  if (!(c.ly > 0.0)) throw ConfigError("grid.ly", "must be positive");

  ModelParams& m = c.model;
  if (has("model.variant")) {
    try {
      m.variant = parse_variant(trim(kv["model.variant"]));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("model.variant", e.what());
    }
  }
  if (has("model.mu")) m.mu = to_double("model.mu", kv["model.mu"]);
  if (has("model.lambda")) m.lame_lambda = to_double("model.lambda", kv["model.lambda"]);
  if (has("model.k")) m.k_interp = to_double("model.k", kv["model.k"]);
  if (has("model.Gc")) m.Gc = to_double("model.Gc", kv["model.Gc"]);
  if (has("model.eps")) m.eps = to_double("model.eps", kv["model.eps"]);
  if (has("model.eta")) m.eta = to_double("model.eta", kv["model.eta"]);
  if (has("model.linf_bound")) m.linf_bound = to_double("model.linf_bound", kv["model.linf_bound"]);
  if (!(m.mu > 0.0)) throw ConfigError("model.mu", "must be positive");
  if (!(m.lame_lambda > -m.mu)) throw ConfigError("model.lambda", "must exceed -mu");
  if (!(m.Gc > 0.0)) throw ConfigError("model.Gc", "must be positive");
  if (!(m.eps > 0.0)) throw ConfigError("model.eps", "must be positive");
  if (!(m.eta >= 0.0)) throw ConfigError("model.eta", "must be non-negative");
  if (!(m.k() >= 0.0 && m.k() <= m.bulk_modulus())) throw ConfigError("model.k", "must lie in [0, lambda + mu]");
  if (m.linf_bound && !(*m.linf_bound > 0.0)) throw ConfigError("model.linf_bound", "must be positive");
  for (const std::string& w : m.validate()) c.warnings.push_back(w);

  if (has("load.t")) c.loads = to_list("load.t", kv["load.t"]);

  SolveOptions& s = c.solver;
  if (has("solver.tol_grad")) s.tol_grad = to_double("solver.tol_grad", kv["solver.tol_grad"]);
  if (has("solver.tol_energy")) s.tol_energy = to_double("solver.tol_energy", kv["solver.tol_energy"]);
  if (has("solver.tol_dv")) s.tol_dv = to_double("solver.tol_dv", kv["solver.tol_dv"]);
  if (has("solver.max_outer")) s.max_outer = static_cast<int>(to_integer("solver.max_outer", kv["solver.max_outer"]));
  if (has("solver.max_newton"))
    s.max_newton = static_cast<int>(to_integer("solver.max_newton", kv["solver.max_newton"]));
  if (has("solver.cg_tol")) s.cg_tol = to_double("solver.cg_tol", kv["solver.cg_tol"]);
  if (has("solver.cg_max_iter"))
    s.cg_max_iter = static_cast<int>(to_integer("solver.cg_max_iter", kv["solver.cg_max_iter"]));
  if (has("solver.linear")) {
    const std::string name = trim(kv["solver.linear"]);
    if (name == "direct") s.u_solver = LinearSolver::Direct;
    else if (name == "cg") s.u_solver = LinearSolver::Cg;
    else throw ConfigError("solver.linear", "expected direct or cg, got '" + name + "'");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("solver", e.what());
  }

  if (has("notch.enabled")) c.notch.enabled = to_bool("notch.enabled", kv["notch.enabled"]);
  c.notch.p = {0.0, 0.5 * c.ly};
  c.notch.q = {c.lx, 0.5 * c.ly};
  if (has("notch.x0")) c.notch.p.x = to_double("notch.x0", kv["notch.x0"]);
  if (has("notch.y0")) c.notch.p.y = to_double("notch.y0", kv["notch.y0"]);
  if (has("notch.x1")) c.notch.q.x = to_double("notch.x1", kv["notch.x1"]);
  if (has("notch.y1")) c.notch.q.y = to_double("notch.y1", kv["notch.y1"]);
  if (has("notch.pinned")) c.notch.pinned = to_bool("notch.pinned", kv["notch.pinned"]);

  if (has("recovery.eps")) c.recovery_eps = to_list("recovery.eps", kv["recovery.eps"]);
  for (double e : c.recovery_eps)
    if (!(e > 0.0)) throw ConfigError("recovery.eps", "values must be positive");

  if (has("lemma.trials")) c.lemma_trials = static_cast<int>(to_integer("lemma.trials", kv["lemma.trials"]));
  if (has("lemma.samples")) c.lemma_samples = static_cast<int>(to_integer("lemma.samples", kv["lemma.samples"]));
  if (has("lemma.p")) c.lemma_p = to_double("lemma.p", kv["lemma.p"]);
  if (has("lemma.seed")) c.seed = static_cast<std::uint64_t>(to_integer("lemma.seed", kv["lemma.seed"]));
  if (c.lemma_trials < 1) throw ConfigError("lemma.trials", "must be positive");
  if (c.lemma_samples < 4) throw ConfigError("lemma.samples", "must be at least 4");
  if (!(c.lemma_p >= 1.0)) throw ConfigError("lemma.p", "must be at least 1");

  if (has("output.dir")) c.output_dir = trim(kv["output.dir"]);
  if (has("output.write_fields")) c.write_fields = to_bool("output.write_fields", kv["output.write_fields"]);

  if (solves_fields(c.kind)) {
    const double h = std::max(c.lx / c.nx, c.ly / c.ny);
    if (m.eps < 2.0 * h)
      throw ConfigError("model.eps", fmt::format("eps = {} is below twice the mesh size {}", m.eps, h));
    if (m.eps < 3.0 * h)
      c.warnings.push_back(fmt::format("eps = {} is below three mesh sizes ({}); regularization under-resolved", m.eps,
                                       3.0 * h));
  }
  return c;
}

void apply_override(pt::ptree& tree, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos) throw ConfigError(item, "override must have the form section.key=value");
  const std::string key = trim(item.substr(0, eq));
  if (!kKnownKeys.count(key)) throw ConfigError(key, "unknown key");
  tree.put(pt::ptree::path_type(key, '.'), trim(item.substr(eq + 1)));
}

std::string num(double x) { return fmt::format("{:.10g}", x); }

double rel_err(double value, double reference) {
  const double d = std::abs(reference) > 0.0 ? std::abs(reference) : 1.0;
  return std::abs(value - reference) / d;
}

double min_of(const Field& f) { return *std::min_element(f.values.begin(), f.values.end()); }
double max_of(const Field& f) { return *std::max_element(f.values.begin(), f.values.end()); }

bool solve_failed(const SolveHistory& h) { return !h.converged || h.u_step_failed || h.v_step_failed; }

class Report {
 public:
  void line(const std::string& key, const std::string& value) { text_ += key + ": " + value + "\n"; }
  void line(const std::string& key, double value) { line(key, num(value)); }
  void check(const std::string& name, bool ok) {
    line("check " + name, ok ? "PASS" : "FAIL");
    all_ok_ = all_ok_ && ok;
  }
  const std::string& text() const { return text_; }
  bool all_ok() const { return all_ok_; }

 private:
  std::string text_;
  bool all_ok_ = true;
};

void header(Report& r, const ScenarioConfig& c) {
  r.line("scenario", to_string(c.kind));
  for (const std::string& w : c.warnings) r.line("warning", w);
  if (c.kind == ScenarioKind::LemmaCheck) return;  // no material model involved
  const ModelParams& m = c.model;
  r.line("variant", to_string(m.variant));
  r.line("mu", m.mu);
  r.line("lambda", m.lame_lambda);
  r.line("K", m.bulk_modulus());
  r.line("k", m.k());
  r.line("Gc", m.Gc);
  if (c.kind == ScenarioKind::RecoveryCheck) {
    r.line("eps_eta", "per run, eta = eps^2");
    return;
  }
  r.line("eps", m.eps);
  r.line("eta", m.eta);
  if (solves_fields(c.kind)) r.line("grid", fmt::format("{} x {} on {} x {}", c.nx, c.ny, num(c.lx), num(c.ly)));
}

struct Artifacts {
  std::vector<std::filesystem::path> files;
  std::vector<EnergyBreakdown> history;
};

void write_step(const ScenarioConfig& c, Artifacts& art, const std::string& name, const Field& u, const Field& v) {
  if (!c.write_fields) return;
  const auto path = c.output_dir / name;
  write_fields(u, v, path);
  art.files.push_back(path);
}

void append_history(Artifacts& art, const SolveHistory& h, bool first) {
  // Each step after the first starts from the previous step's final state.
  const std::size_t start = first ? 0 : 1;
  for (std::size_t k = start; k < h.outer_energy.size(); ++k) art.history.push_back(h.outer_energy[k]);
}

Mat2 load_matrix(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Tension: return Mat2{1.0, 0.0, 0.0, 0.0};
    case ScenarioKind::Compression: return Mat2{-1.0, 0.0, 0.0, -1.0};
    case ScenarioKind::ShearPatch: return Mat2{0.0, 1.0, 0.0, 0.0};
    default: return Mat2{1.0, 0.0, 0.0, 1.0};
  }
}

bool run_homogeneous(const ScenarioConfig& c, Report& r, Artifacts& art) {
  const Grid g(c.nx, c.ny, c.lx, c.ly);
  const Mat2 W = load_matrix(c.kind);
  const DirichletSpec bc = affine_boundary(W);
  const double area = c.lx * c.ly;

  Field u = Field::zeros(g, 2);
  Field v = Field::constant(g, 1.0);
  std::vector<unsigned char> pinned;
  if (c.notch.enabled) {
    const auto nodes = notch_nodes(g, c.notch.p, c.notch.q);
    for (int n = 0; n < g.node_count(); ++n)
      if (nodes[n]) v.values[n] = 0.0;
    if (c.notch.pinned) pinned = nodes;
    r.line("notch", fmt::format("({}, {}) -> ({}, {}) {}", num(c.notch.p.x), num(c.notch.p.y), num(c.notch.q.x),
                                num(c.notch.q.y), c.notch.pinned ? "pinned" : "seeded"));
  }

  bool failed = false;
  for (std::size_t k = 0; k < c.loads.size(); ++k) {
    const double t = c.loads[k];
    const Constraints cons = resolve_dirichlet(bc, t, g);
    AlternateResult res = alternate_minimize(u, v, c.model, cons, c.solver, pinned);
    u = std::move(res.u);
    v = std::move(res.v);
    append_history(art, res.history, k == 0);
    write_step(c, art, fmt::format("fields_step{:03}.vtk", k), u, v);
    failed = failed || solve_failed(res.history);

    const HomogeneousState hs = homogeneous_state(c.model, SymTensor2::sym(t * W));
    const double E = res.history.outer_energy.back().total();
    const double Eref = hs.energy_density * area;
    const std::string s = fmt::format("step {} ", k);
    r.line(s + "t", t);
    r.line(s + "outer_iterations", res.history.outer_iterations);
    r.line(s + "converged", res.history.converged ? "yes" : "no");
    r.line(s + "energy", E);
    r.line(s + "reference_energy", Eref);
    r.line(s + "relative_error", rel_err(E, Eref));
    double v_err = 0.0;
    for (double x : v.values) v_err = std::max(v_err, rel_err(x, hs.v_star));
    r.line(s + "min_v", min_of(v));
    r.line(s + "max_v", max_of(v));
    r.line(s + "reference_v_star", hs.v_star);
    r.line(s + "v_relative_error", v_err);
    if (!c.notch.enabled) r.check(s + "energy_within_1pct", rel_err(E, Eref) <= 0.01);
    if (c.kind == ScenarioKind::Compression) r.check(s + "min_v_at_least_0.99", min_of(v) >= 0.99);
  }
  return failed;
}

bool run_precracked(const ScenarioConfig& c, Report& r, Artifacts& art) {
  const Grid g(c.nx, c.ny, c.lx, c.ly);
  const Mat2 W = load_matrix(c.kind);
  const DirichletSpec bc = affine_boundary(W);
  const double area = c.lx * c.ly;
  const auto nodes = notch_nodes(g, c.notch.p, c.notch.q);
  Field v_notch = Field::constant(g, 1.0);
  for (int n = 0; n < g.node_count(); ++n)
    if (nodes[n]) v_notch.values[n] = 0.0;
  const std::vector<unsigned char> pinned = c.notch.pinned ? nodes : std::vector<unsigned char>{};
  r.line("notch", fmt::format("({}, {}) -> ({}, {}) {}", num(c.notch.p.x), num(c.notch.p.y), num(c.notch.q.x),
                              num(c.notch.q.y), c.notch.pinned ? "pinned" : "seeded"));
  r.line("energy_history", "cracked branch");

  bool failed = false;
  for (std::size_t k = 0; k < c.loads.size(); ++k) {
    const double t = c.loads[k];
    const BranchRun intact = run_branch(g, c.model, bc, t, Field::constant(g, 1.0), c.solver);
    const BranchRun cracked = run_branch(g, c.model, bc, t, v_notch, c.solver, pinned);
    append_history(art, cracked.result.history, true);
    write_step(c, art, fmt::format("fields_uncracked_step{:03}.vtk", k), intact.result.u, intact.result.v);
    write_step(c, art, fmt::format("fields_cracked_step{:03}.vtk", k), cracked.result.u, cracked.result.v);
    failed = failed || solve_failed(intact.result.history) || solve_failed(cracked.result.history);

    const HomogeneousState hs = homogeneous_state(c.model, SymTensor2::sym(t * W));
    const double Eref = hs.energy_density * area;
    const std::string s = fmt::format("step {} ", k);
    r.line(s + "t", t);
    r.line(s + "uncracked_energy", intact.energy.total());
    r.line(s + "reference_energy", Eref);
    r.line(s + "uncracked_relative_error", rel_err(intact.energy.total(), Eref));
    r.line(s + "uncracked_min_v", intact.min_v);
    r.line(s + "cracked_energy", cracked.energy.total());
    r.line(s + "cracked_surface_energy", cracked.energy.surface());
    r.line(s + "cracked_min_v", cracked.min_v);
    r.line(s + "cracked_outer_iterations", cracked.result.history.outer_iterations);
    r.line(s + "lower_branch", cracked.energy.total() < intact.energy.total() ? "cracked" : "uncracked");
    r.check(s + "uncracked_energy_within_1pct", rel_err(intact.energy.total(), Eref) <= 0.01);
  }
  return failed;
}

bool run_calibration(const ScenarioConfig& c, Report& r, Artifacts& art) {
  const ModelParams& m = c.model;
  const double analytic = m.Gc * 2.0 * profile_energy_halfline(m.eps);
  r.line("surface_energy_per_length", analytic);
  r.line("reference", m.Gc);
  r.line("relative_error", rel_err(analytic, m.Gc));
  r.check("calibration_within_1e-6", rel_err(analytic, m.Gc) <= 1e-6);

  // The same profile across a horizontal line, evaluated on the grid.
  const Grid g(c.nx, c.ny, c.lx, c.ly);
  const CrackPath crack = CrackPath::from_segments({{{0.0, 0.5 * c.ly}, {c.lx, 0.5 * c.ly}}});
  Field v = Field::zeros(g, 1);
  for (int n = 0; n < g.node_count(); ++n)
    v.values[n] = optimal_profile(crack_distance(crack, g.node_position(n)) / m.eps);
  const Field u = Field::zeros(g, 2);
  const EnergyBreakdown e = total_energy(u, v, m);
  art.history.push_back(e);
  write_step(c, art, "fields_step000.vtk", u, v);
  r.line("grid", fmt::format("{} x {} on {} x {}", c.nx, c.ny, num(c.lx), num(c.ly)));
  r.line("grid_surface_energy_per_length", e.surface() / c.lx);
  r.line("grid_relative_error", rel_err(e.surface() / c.lx, m.Gc));
  return false;
}

bool run_recovery(const ScenarioConfig& c, Report& r, Artifacts& art) {
  const double t = c.loads.front();
  const SharpConfig cfg = SharpConfig::straight_crack(c.lx, c.ly, {0.0, 0.5 * c.ly}, {c.lx, 0.5 * c.ly},
                                                      AffineMap{Mat2{}, Vec2{0.0, t}}, AffineMap{});
  r.line("configuration", fmt::format("opening crack y = {}, jump (0, {})", num(0.5 * c.ly), num(t)));
  double previous = INFINITY;
  bool monotone = true;
  for (std::size_t k = 0; k < c.recovery_eps.size(); ++k) {
    const double eps = c.recovery_eps[k];
    const RecoveryParams rp = RecoveryParams::standard(eps);
    const RecoveryReport rep = recovery_energy_check(cfg, c.model, rp);
    art.history.push_back(rep.regularized);
    const std::string s = fmt::format("eps {} ", num(eps));
    const double bound = 1.0 + rep.ell / 2.0;
    r.line(s + "lattice_n", rep.lattice_n);
    r.line(s + "regularized_energy", rep.regularized.total());
    r.line(s + "reference_energy", rep.sharp.total());
    r.line(s + "relative_error", rel_err(rep.regularized.total(), rep.sharp.total()));
    r.line(s + "ratio_total", rep.ratio_total);
    r.line(s + "ratio_surface", rep.ratio_surface);
    r.line(s + "bound_1_plus_ell_half", bound);
    r.line(s + "div_minus_l2", rep.div_minus_l2);
    r.line(s + "strain_constant", rep.strain_constant);
    r.check(s + "ratio_within_bound_plus_0.10", rep.ratio_total <= bound + 0.10);
    monotone = monotone && rep.ratio_total < previous;
    previous = rep.ratio_total;
  }
  r.check("ratio_decreasing_along_eps", monotone);
  return false;
}

bool run_lemma(const ScenarioConfig& c, Report& r) {
  const LemmaTrialStats st = run_lemma_trials(c.lemma_trials, c.seed, c.lemma_samples, c.lemma_p);
  r.line("trials", st.trials);
  r.line("rescaled", st.rescaled);
  r.line("p", c.lemma_p);
  r.line("reference_constant_min", st.min_constant);
  r.line("reference_constant_max", st.max_constant);
  r.line("max_measured_ratio", st.max_measured_ratio);
  r.line("worst_ratio_relative_to_constant", st.worst_ratio_over_constant);
  r.line("linf_violations", st.linf_violations);
  r.line("lp_violations", st.lp_violations);
  r.line("skew_violations", st.skew_violations);
  r.line("key_inequality_violations", st.key_violations);
  r.check("no_violations", st.violations() == 0);
  return false;
}

}  // namespace

std::string to_string(ScenarioKind k) { return kScenarioNames.at(k); }

ScenarioKind parse_scenario(const std::string& name) {
  for (const auto& [k, n] : kScenarioNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

ScenarioConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}", e.line()), e.message());
  }
  for (const std::string& o : overrides) apply_override(tree, o);
  return build_config(tree);
}

ScenarioConfig parse_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot read configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::vector<unsigned char> notch_nodes(const Grid& grid, const Vec2& p, const Vec2& q) {
  std::vector<unsigned char> out(grid.node_count(), 0);
  const double tol = 0.5 * std::min(grid.hx(), grid.hy()) * (1.0 + 1e-9);
  for (int n = 0; n < grid.node_count(); ++n)
    if (point_segment_distance(grid.node_position(n), p, q) <= tol) out[n] = 1;
  return out;
}

DirichletSpec affine_boundary(const Mat2& W) {
  DirichletSpec spec;
  spec.add_full_boundary([W](Vec2 x, double t) { return t * (W * x); });
  return spec;
}

BranchRun run_branch(const Grid& grid, const ModelParams& p, const DirichletSpec& bc, double t, const Field& v0,
                     const SolveOptions& opt, const std::vector<unsigned char>& pinned) {
  const Constraints cons = resolve_dirichlet(bc, t, grid);
  BranchRun b{alternate_minimize(Field::zeros(grid, 2), v0, p, cons, opt, pinned), 0.0, 0.0, {}};
  b.min_v = min_of(b.result.v);
  b.max_v = max_of(b.result.v);
  b.energy = b.result.history.outer_energy.back();
  return b;
}

ScenarioOutcome run_scenario(const ScenarioConfig& c) {
  std::filesystem::create_directories(c.output_dir);
  Report r;
  header(r, c);
  Artifacts art;
  bool failed = false;
  switch (c.kind) {
    case ScenarioKind::Tension:
    case ScenarioKind::Compression:
    case ScenarioKind::ShearPatch: failed = run_homogeneous(c, r, art); break;
    case ScenarioKind::PrecrackedPlate: failed = run_precracked(c, r, art); break;
    case ScenarioKind::Calibration: failed = run_calibration(c, r, art); break;
    case ScenarioKind::RecoveryCheck: failed = run_recovery(c, r, art); break;
    case ScenarioKind::LemmaCheck: failed = run_lemma(c, r); break;
  }
  if (!art.history.empty()) {
    const auto path = c.output_dir / "energy_history.csv";
    write_energy_history(art.history, path);
    art.files.push_back(path);
  }
  r.line("solver", failed ? "not converged" : "converged");
  r.line("checks", r.all_ok() ? "all passed" : "some failed");

  ScenarioOutcome out;
  out.exit_code = failed ? 2 : 0;
  out.summary = r.text();
  const auto path = c.output_dir / "summary.txt";
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << out.summary;
  art.files.push_back(path);
  out.files = std::move(art.files);
  return out;
}

}  // namespace fissura
