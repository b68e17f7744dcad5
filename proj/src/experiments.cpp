#include "ucplab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <thread>
#include <utility>

#include "ucplab/carleman.hpp"
#include "ucplab/config.hpp"
#include "ucplab/dft.hpp"
#include "ucplab/errors.hpp"
#include "ucplab/grid.hpp"
#include "ucplab/hamiltonian.hpp"
#include "ucplab/report_json.hpp"
#include "ucplab/spectra.hpp"
#include "ucplab/ucp.hpp"

namespace ucplab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Shared run state: the consumed config, resolved output settings, stage
/// clock, and the artifact list the manifest will carry.
struct Ctx {
  Config cfg;
  const RunOptions& opt;
  RunManifest man;

  std::string dir;
  bool want_csv = false;
  bool want_gnuplot = false;
  bool want_psi = false;
  int threads = 1;

  std::vector<std::pair<std::string, std::string>> echo;

  Clock::time_point run_start = Clock::now();
  Clock::time_point stage_start = Clock::now();
  std::string stage_name;

  explicit Ctx(Config c, const RunOptions& o) : cfg(std::move(c)), opt(o) {}

  void stage(const std::string& name) {
    close_stage();
    stage_name = name;
    stage_start = Clock::now();
  }

  void close_stage() {
    if (!stage_name.empty())
      man.stages.push_back({stage_name, seconds_since(stage_start)});
    stage_name.clear();
  }

  /// Snapshot the fully resolved config (call after every key has been
  /// read, so recorded defaults are included) and hash it key-sorted.
  void seal_config() {
    cfg.require_all_consumed();
    echo = cfg.entries();
    auto sorted = echo;
    std::sort(sorted.begin(), sorted.end());
    std::string blob;
    for (const auto& [k, v] : sorted) blob += k + "=" + v + "\n";
    man.config_hash = fnv1a_hex(blob);
  }

  void emit(const std::string& name, const std::string& text) {
    write_text_file(dir + "/" + name, text);
    man.outputs.push_back(name);
  }

  /// Standard report envelope: schema, experiment, config echo, then the
  /// caller fills the open "report" object and calls take_report.
  JsonWriter report_head() const {
    JsonWriter w;
    w.begin_object();
    w.kv("schema", "ucplab/1");
    w.kv("experiment", man.experiment);
    w.kv("config_hash", man.config_hash);
    w.key("config").begin_object();
    for (const auto& [k, v] : echo) w.kv(k, v);
    w.end_object();
    w.key("report").begin_object();
    return w;
  }

  void emit_report(JsonWriter& w) {
    w.end_object();  // report
    w.end_object();  // document
    emit(man.experiment + "-report.json", w.take());
  }
};

[[noreturn]] void reject_formats(const std::string& exp, const std::string& which,
                                 const std::string& why) {
  throw_config("experiment '" + exp + "' does not produce " + which + " output (" + why + ")");
}

void reject_seed_override(const Ctx& c, const std::string& why) {
  if (c.opt.has_seed_override)
    throw_config("--seed given, but " + why + " has no random stage to apply it to");
}

Grid grid_from_config(Config& cfg) {
  int d = static_cast<int>(cfg.get_integer("grid.d"));
  int N = static_cast<int>(cfg.get_integer_or("grid.N", 1));
  int m = static_cast<int>(cfg.get_integer("grid.m"));
  double L = cfg.get_number("grid.L");
  Boundary b = boundary_from_string(cfg.get_string_or("grid.boundary", "periodic"));
  return make_grid(d, N, m, L, b);
}

/// Reads a potential block (prefix.kind plus kind-specific keys).  An absent
/// optional block means "no potential" (constant zero interaction).  An
/// optional `shift` key adds a constant, e.g. v2 = {kind="harmonic", shift=3.0}
/// for a shifted copy of v.
PotentialSpec potential_from_config(Config& cfg, const std::string& prefix, bool required) {
  if (!cfg.has(prefix + ".kind")) {
    if (required) throw_config("missing potential block '" + prefix + "' (need " + prefix + ".kind)");
    return PotentialSpec::constant(0.0);
  }
  std::string kind = cfg.get_string(prefix + ".kind");
  PotentialSpec base = [&] {
    if (kind == "harmonic")
      return PotentialSpec::harmonic(cfg.get_number_or(prefix + ".kappa", 1.0));
    if (kind == "soft-coulomb")
      return PotentialSpec::soft_coulomb(cfg.get_number_or(prefix + ".q", 1.0),
                                         cfg.get_number_or(prefix + ".a", 1.0));
    if (kind == "power-singular")
      return PotentialSpec::power_singular(cfg.get_number(prefix + ".alpha"),
                                           cfg.get_number_or(prefix + ".cap", 1e9));
    if (kind == "gaussian-well")
      return PotentialSpec::gaussian_well(cfg.get_number_or(prefix + ".depth", 1.0),
                                          cfg.get_number_or(prefix + ".width", 1.0));
    if (kind == "constant") return PotentialSpec::constant(cfg.get_number(prefix + ".c"));
    throw_config("unknown potential kind '" + kind + "' for '" + prefix +
                 "' (expected harmonic, soft-coulomb, power-singular, gaussian-well, constant)");
  }();
  if (cfg.has(prefix + ".shift"))
    base = PotentialSpec::sum({base, PotentialSpec::constant(cfg.get_number(prefix + ".shift"))});
  return base;
}

struct SolverParams {
  int k = 1;
  double tol = 1e-9;
  std::uint64_t seed = 7;
  int max_iter = 600;
  bool spectral = true;
};

SolverParams solver_from_config(Config& cfg, const RunOptions& opt, bool allow_k) {
  SolverParams p;
  if (allow_k) p.k = static_cast<int>(cfg.get_integer_or("solver.k", 1));
  p.tol = cfg.get_number_or("solver.tol", 1e-9);
  p.max_iter = static_cast<int>(cfg.get_integer_or("solver.max_iter", 600));
  p.spectral = cfg.get_bool_or("solver.spectral", true);
  if (opt.has_seed_override) {
    p.seed = opt.seed_override;
    cfg.override_integer("solver.seed", static_cast<std::int64_t>(opt.seed_override));
  } else {
    p.seed = static_cast<std::uint64_t>(cfg.get_integer_or("solver.seed", 7));
  }
  return p;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const std::string& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  return out;
}

std::string flag(bool b) { return b ? "1" : "0"; }

void append_grid_object(JsonWriter& w, const Grid& g) {
  w.key("grid").begin_object();
  append_fields(w, g);
  w.end_object();
}

// ---------------------------------------------------------------------------
// solve / density

void run_solve(Ctx& c, bool with_density) {
  Grid g = grid_from_config(c.cfg);
  PotentialSpec v = potential_from_config(c.cfg, "v", true);
  PotentialSpec w = potential_from_config(c.cfg, "w", false);
  SolverParams sp = solver_from_config(c.cfg, c.opt, true);
  if (sp.k < 1) throw_config("solver.k must be >= 1");
  if (with_density && c.want_gnuplot && g.d != 1)
    reject_formats(c.man.experiment, "gnuplot", "density plots need d = 1");
  c.seal_config();

  c.stage("assemble");
  Hamiltonian ham = build_hamiltonian(v, w, g, sp.spectral);

  c.stage("solve");
  std::optional<Operator> precond;
  const Operator* pp = nullptr;
  if (g.boundary == Boundary::periodic) {
    precond = kinetic_preconditioner(g, sp.spectral);
    pp = &*precond;
  }
  SpectralResult sr = solve_ground(ham.op, sp.k, sp.tol, sp.seed, sp.max_iter, pp);
  c.man.solver_ok = sr.converged;

  DensityProfile rho;
  if (with_density) {
    c.stage("density");
    rho = one_particle_density(sr.eigenvectors.at(0));
  }

  c.stage("emit");
  JsonWriter jw = c.report_head();
  append_grid_object(jw, g);
  jw.kv("potential", ham.potential.provenance);
  jw.kv("spectral_kinetic", sp.spectral);
  jw.key("spectral").begin_object();
  append_fields(jw, sr);
  jw.end_object();
  if (with_density) {
    jw.key("density").begin_object();
    append_fields(jw, rho);
    jw.end_object();
  }
  c.emit_report(jw);

  if (c.want_csv) {
    std::vector<std::string> rows;
    std::string name;
    std::string header;
    std::vector<std::string> comments;
    if (with_density) {
      name = c.man.experiment + "-table.csv";
      header = "x";
      for (int a = 1; a < g.d; ++a) header += ",x" + std::to_string(a + 1);
      header += ",rho";
      comments = {"one-particle density; h-weighted normalization: h^d * sum(rho) = N",
                  "h = " + format_g17(rho.grid1.h)};
      std::vector<int> idx(rho.grid1.n);
      for (std::uint64_t pidx = 0; pidx < rho.grid1.points(); ++pidx) {
        rho.grid1.decode(pidx, idx.data());
        std::string row;
        for (int a = 0; a < rho.grid1.n; ++a)
          row += format_g17(rho.grid1.coord(idx[a])) + ",";
        row += format_g17(rho.rho[pidx]);
        rows.push_back(std::move(row));
      }
    } else {
      name = c.man.experiment + "-table.csv";
      header = "index,eigenvalue,residual";
      // Extra Ritz values beyond the k requested vectors carry no residual.
      for (std::size_t i = 0; i < sr.eigenvalues.size(); ++i)
        rows.push_back(csv_row({std::to_string(i), format_g17(sr.eigenvalues[i]),
                                i < sr.residuals.size() ? format_g17(sr.residuals[i]) : ""}));
    }
    write_csv_file(c.dir + "/" + name, comments, header, rows);
    c.man.outputs.push_back(name);
  }

  if (c.want_gnuplot) {
    std::string name = c.man.experiment + "-plot.dat";
    std::string text;
    if (with_density) {
      text = "# x rho\n";
      for (std::uint64_t pidx = 0; pidx < rho.grid1.points(); ++pidx)
        text += format_g17(rho.grid1.coord(static_cast<int>(pidx))) + " " +
                format_g17(rho.rho[pidx]) + "\n";
    } else {
      text = "# index eigenvalue\n";
      for (std::size_t i = 0; i < sr.eigenvalues.size(); ++i)
        text += std::to_string(i) + " " + format_g17(sr.eigenvalues[i]) + "\n";
    }
    c.emit(name, text);
  }

  if (c.want_psi) {
    std::string stem = c.dir + "/" + c.man.experiment + "-psi";
    save_grid_function(sr.eigenvectors.at(0), stem);
    c.man.outputs.push_back(c.man.experiment + "-psi.bin");
    c.man.outputs.push_back(c.man.experiment + "-psi.json");
  }
}

// ---------------------------------------------------------------------------
// hk-verify

void run_hk(Ctx& c) {
  if (c.want_csv) reject_formats("hk-verify", "csv", "the comparison has no sweep table");
  if (c.want_gnuplot) reject_formats("hk-verify", "gnuplot", "the comparison has no sweep table");
  Grid g = grid_from_config(c.cfg);
  PotentialSpec v1 = potential_from_config(c.cfg, "v", true);
  PotentialSpec v2 = potential_from_config(c.cfg, "v2", true);
  PotentialSpec w = potential_from_config(c.cfg, "w", false);
  SolverParams sp = solver_from_config(c.cfg, c.opt, false);
  c.seal_config();

  c.stage("hk");
  HKReport r = hk_verify(v1, v2, w, g, sp.tol, sp.seed, sp.spectral, sp.max_iter);
  c.man.solver_ok = r.converged;

  c.stage("emit");
  JsonWriter jw = c.report_head();
  append_grid_object(jw, g);
  jw.key("potentials").begin_object();
  jw.kv("v", v1.describe());
  jw.kv("v2", v2.describe());
  jw.kv("w", w.describe());
  jw.end_object();
  jw.kv("tol", sp.tol);
  jw.kv("seed", static_cast<std::uint64_t>(sp.seed));
  jw.key("hk").begin_object();
  append_fields(jw, r);
  jw.end_object();
  // Convenience copy at top level so downstream scripts can read the shift
  // constant without descending into the nested block.
  jw.kv("recovered_c", r.recovered_c);
  c.emit_report(jw);
}

// ---------------------------------------------------------------------------
// carleman (sweep | bootstrap)

void run_carleman_sweep(Ctx& c) {
  reject_seed_override(c, "the carleman sweep");
  Grid g = grid_from_config(c.cfg);
  if (g.N != 1)
    throw_config("carleman sweeps run on a one-particle grid; set grid.N = 1 and use eps.N "
                 "for the particle-count bookkeeping");
  bool ladder = c.cfg.get_bool_or("family.ladder", false);
  int count = 0;
  double a_min = 0.0, a_max = 0.0, drop = 0.105;
  if (!ladder) {
    count = static_cast<int>(c.cfg.get_integer("family.count"));
    a_min = c.cfg.get_number("family.a_min");
    a_max = c.cfg.get_number("family.a_max");
    drop = c.cfg.get_number_or("family.drop", 0.105);
  }
  std::vector<double> tau_list = c.cfg.get_number_list("tau_list");
  double s = c.cfg.get_number_or("s", 0.0);
  double xi = c.cfg.get_number_or("xi", 0.0);
  double delta = c.cfg.get_number_or("delta", 0.0);
  int eps_d = static_cast<int>(c.cfg.get_integer_or("eps.d", g.d));
  int eps_N = static_cast<int>(c.cfg.get_integer_or("eps.N", 1));
  c.seal_config();

  c.stage("family");
  std::vector<ShellFunction> family =
      ladder ? default_shell_ladder(g) : shell_bump_family(g, count, a_min, a_max, drop);

  c.stage("sweep");
  CarlemanReport r = estimate_kappa_and_eps(family, tau_list, s, xi, delta, eps_d, eps_N,
                                            c.threads);

  c.stage("emit");
  JsonWriter jw = c.report_head();
  append_grid_object(jw, g);
  jw.key("family").begin_array();
  for (const ShellFunction& f : family) jw.value(f.id);
  jw.end_array();
  jw.key("sweep").begin_object();
  append_fields(jw, r);
  jw.end_object();
  c.emit_report(jw);

  if (c.want_csv) {
    std::vector<std::string> rows;
    for (const RatioSample& sample : r.ratios)
      rows.push_back(csv_row({format_g17(sample.tau), format_g17(r.s), format_g17(r.xi),
                              sample.function_id, format_g17(sample.ratio)}));
    std::string name = "carleman-table.csv";
    write_csv_file(c.dir + "/" + name,
                   {"inadmissible rows (weight dynamic range over budget) carry ratio 0; see "
                    "the JSON report for per-sample flags"},
                   "tau,s,xi,function_id,ratio", rows);
    c.man.outputs.push_back(name);
  }

  if (c.want_gnuplot) {
    std::string text = "# tau kappa_tau\n";
    for (std::size_t i = 0; i < r.tau_list.size(); ++i)
      text += format_g17(r.tau_list[i]) + " " + format_g17(r.kappa_tau[i]) + "\n";
    c.emit("carleman-plot.dat", text);
  }
}

void run_carleman_bootstrap(Ctx& c) {
  reject_seed_override(c, "the localization chain");
  Grid g = grid_from_config(c.cfg);
  double a0 = c.cfg.get_number("pair.a0");
  double b0 = c.cfg.get_number("pair.b0");
  double vcap = c.cfg.get_number_or("pair.vcap", 120.0);
  std::vector<double> tau_list = c.cfg.get_number_list("tau_list");
  double delta = c.cfg.get_number_or("delta", 0.0);
  double c_hint = c.cfg.get_number_or("c_hint", 0.0);
  c.seal_config();

  c.stage("manufacture");
  ManufacturedPair pair = manufacture_annular_eigenpair(g, a0, b0, vcap);

  c.stage("chain");
  BootstrapReport r = bootstrap_chain_check(pair.psi, pair.V, tau_list, delta, c_hint);

  c.stage("emit");
  JsonWriter jw = c.report_head();
  append_grid_object(jw, g);
  jw.key("pair").begin_object();
  jw.kv("a0", a0).kv("b0", b0).kv("vcap", vcap);
  jw.kv("provenance", pair.V.provenance);
  jw.end_object();
  jw.key("chain").begin_object();
  append_fields(jw, r);
  jw.end_object();
  c.emit_report(jw);

  if (c.want_csv) {
    std::vector<std::string> rows;
    for (const BootstrapTerm& t : r.terms)
      rows.push_back(csv_row(
          {format_g17(t.tau), format_g17(t.W), format_g17(t.EQ), format_g17(t.VT),
           format_g17(t.P), format_g17(t.FR), format_g17(t.GN), format_g17(t.RES),
           format_g17(t.kappa0), format_g17(t.kappa34), flag(t.range_ok), flag(t.triangle_ok),
           flag(t.certificate_ok), flag(t.absorb_ok), flag(t.small_ok),
           format_g17(t.final_bound), flag(t.final_ok)}));
    std::string name = "carleman-table.csv";
    write_csv_file(c.dir + "/" + name, {},
                   "tau,W,EQ,VT,P,FR,GN,RES,kappa0,kappa34,range_ok,triangle_ok,"
                   "certificate_ok,absorb_ok,small_ok,final_bound,final_ok",
                   rows);
    c.man.outputs.push_back(name);
  }

  if (c.want_gnuplot) {
    std::string text = "# tau final_bound\n";
    for (const BootstrapTerm& t : r.terms)
      text += format_g17(t.tau) + " " + format_g17(t.final_bound) + "\n";
    c.emit("carleman-plot.dat", text);
  }
}

void run_carleman(Ctx& c) {
  if (c.want_psi) reject_formats("carleman", "psi", "no wavefunction artifact");
  std::string mode = c.cfg.get_string_or("mode", "sweep");
  if (mode == "sweep") {
    run_carleman_sweep(c);
  } else if (mode == "bootstrap") {
    run_carleman_bootstrap(c);
  } else {
    throw_config("carleman mode must be \"sweep\" or \"bootstrap\", got \"" + mode + "\"");
  }
}

// ---------------------------------------------------------------------------
// opineq (pencil | sobolev | sqrt)

void run_opineq_pencil(Ctx& c) {
  if (c.want_csv) reject_formats("opineq", "csv", "the pencil route has no sweep table");
  if (c.want_gnuplot) reject_formats("opineq", "gnuplot", "the pencil route has no sweep table");
  Grid g = grid_from_config(c.cfg);
  PotentialSpec v = potential_from_config(c.cfg, "v", true);
  PotentialSpec w = potential_from_config(c.cfg, "w", false);
  double R = c.cfg.get_number("R");
  double delta = c.cfg.get_number("delta");
  double cc = c.cfg.get_number_or("c", 0.0);
  int trials = static_cast<int>(c.cfg.get_integer_or("sample.trials", 0));
  std::uint64_t seed = 42;
  if (trials > 0) {
    if (c.opt.has_seed_override) {
      seed = c.opt.seed_override;
      c.cfg.override_integer("sample.seed", static_cast<std::int64_t>(seed));
    } else {
      seed = static_cast<std::uint64_t>(c.cfg.get_integer_or("sample.seed", 42));
    }
  } else {
    reject_seed_override(c, "the pencil route without sample.trials");
  }
  c.seal_config();

  c.stage("assemble");
  AssembledPotential V = assemble_total_potential(v, w, g);

  c.stage("pencil");
  InequalityReport r = min_eps_form_inequality(V, R, delta, cc);

  double sampled = 0.0;
  if (trials > 0) {
    c.stage("sample");
    sampled = sampled_form_max(V, R, delta, cc, r.sigma, trials, seed);
  }

  c.stage("emit");
  JsonWriter jw = c.report_head();
  append_grid_object(jw, g);
  jw.kv("potential", V.provenance);
  jw.key("inequality").begin_object();
  append_fields(jw, r);
  jw.end_object();
  if (trials > 0) {
    jw.key("sampled").begin_object();
    jw.kv("trials", trials);
    jw.kv("seed", static_cast<std::uint64_t>(seed));
    jw.kv("max", sampled);
    jw.end_object();
  }
  c.emit_report(jw);
}

void run_opineq_sobolev(Ctx& c) {
  reject_seed_override(c, "the sobolev route");
  PotentialSpec v = potential_from_config(c.cfg, "v", true);
  double p = c.cfg.get_number("p");
  int d = static_cast<int>(c.cfg.get_integer("d"));
  double s = c.cfg.get_number("s");
  double R = c.cfg.get_number("R");
  std::vector<double> m_list;
  if (c.cfg.has("M_list")) {
    m_list = c.cfg.get_number_list("M_list");
    if (m_list.empty()) throw_config("M_list must not be empty");
  } else {
    m_list = {c.cfg.get_number("M")};
  }
  c.seal_config();

  c.stage("sobolev");
  std::vector<InequalityReport> reports;
  reports.reserve(m_list.size());
  for (double M : m_list) reports.push_back(sobolev_split_bound(v, p, d, s, R, M));

  c.stage("emit");
  JsonWriter jw = c.report_head();
  jw.kv("potential", v.describe());
  jw.kv("p", p).kv("d", d).kv("s", s).kv("R", R);
  jw.key("sweep").begin_array();
  for (const InequalityReport& r : reports) {
    jw.begin_object();
    append_fields(jw, r);
    jw.end_object();
  }
  jw.end_array();
  c.emit_report(jw);

  if (c.want_csv) {
    std::vector<std::string> rows;
    for (const InequalityReport& r : reports)
      rows.push_back(csv_row({format_g17(r.M), format_g17(r.eps_min), format_g17(r.c),
                              format_g17(r.c_certified)}));
    std::string name = "opineq-table.csv";
    write_csv_file(c.dir + "/" + name, {}, "M,eps_min,c,c_certified", rows);
    c.man.outputs.push_back(name);
  }

  if (c.want_gnuplot) {
    std::string text = "# M eps_min\n";
    for (const InequalityReport& r : reports)
      text += format_g17(r.M) + " " + format_g17(r.eps_min) + "\n";
    c.emit("opineq-plot.dat", text);
  }
}

void run_opineq_sqrt(Ctx& c) {
  if (c.want_csv) reject_formats("opineq", "csv", "the sqrt route has no sweep table");
  if (c.want_gnuplot) reject_formats("opineq", "gnuplot", "the sqrt route has no sweep table");
  int trials = static_cast<int>(c.cfg.get_integer_or("trials", 1000));
  int dim = static_cast<int>(c.cfg.get_integer_or("dim", 16));
  std::uint64_t seed;
  if (c.opt.has_seed_override) {
    seed = c.opt.seed_override;
    c.cfg.override_integer("seed", static_cast<std::int64_t>(seed));
  } else {
    seed = static_cast<std::uint64_t>(c.cfg.get_integer_or("seed", 2024));
  }
  double eps = c.cfg.get_number_or("eps", 0.1);
  double delta = c.cfg.get_number_or("delta", 0.1);
  double cc = c.cfg.get_number_or("c", 1.0);
  c.seal_config();

  c.stage("sqrt");
  SqrtMonotoneReport r = sqrt_monotone_check(trials, dim, seed, eps, delta, cc);

  c.stage("emit");
  JsonWriter jw = c.report_head();
  jw.key("monotone").begin_object();
  append_fields(jw, r);
  jw.end_object();
  c.emit_report(jw);
}

void run_opineq(Ctx& c) {
  if (c.want_psi) reject_formats("opineq", "psi", "no wavefunction artifact");
  std::string route = c.cfg.get_string("route");
  if (route == "pencil") {
    run_opineq_pencil(c);
  } else if (route == "sobolev") {
    run_opineq_sobolev(c);
  } else if (route == "sqrt") {
    run_opineq_sqrt(c);
  } else {
    throw_config("opineq route must be \"pencil\", \"sobolev\", or \"sqrt\", got \"" + route +
                 "\"");
  }
}

// ---------------------------------------------------------------------------
// ucp-scan

/// psi = |x|^power * bump(|x|/b) with the induced potential V = lap psi/psi
/// in closed form on the support (the pair satisfies lap psi = V psi, so the
/// scan's equation residual measures pure discretization error).
struct PowerBumpPair {
  GridFunction psi;
  AssembledPotential V;
};

PowerBumpPair make_power_bump(const Grid& g, double power, double b) {
  if (g.N != 1)
    throw_config("ucp-scan power-bump source needs a one-particle grid (grid.N = 1)");
  if (!(b > 0.0) || b >= g.L) throw_config("power-bump support radius b must lie in (0, L)");
  if (power < 2.0) throw_config("power-bump exponent must be >= 2");
  PowerBumpPair out{GridFunction(g), {}};
  out.V.grid = g;
  out.V.values.assign(g.points(), 0.0);
  out.V.provenance =
      "power-bump(power=" + format_g17(power) + ", b=" + format_g17(b) + ")";
  const Point c0 = origin();
  for (std::uint64_t p = 0; p < g.points(); ++p) {
    double r = point_distance(g, p, c0);
    if (r <= 0.0) continue;  // psi(0) = 0 for power >= 2
    double t = r / b;
    if (t >= 1.0) continue;
    double s2 = 1.0 - t * t;
    double amp = std::pow(r, power) * std::exp(-1.0 / s2);
    if (amp == 0.0 || !std::isfinite(amp)) continue;  // underflow at the support edge
    out.psi[p] = amp;
    double u = -2.0 * t / (s2 * s2);                               // bump'/bump at t
    double uprime = -2.0 * (1.0 + 3.0 * t * t) / (s2 * s2 * s2);   // d/dt of that
    double lr = power / r + u / b;                                 // psi'/psi radially
    out.V.values[p] = lr * lr - power / (r * r) + uprime / (b * b) + (g.n - 1) * lr / r;
  }
  return out;
}

void run_ucp_scan(Ctx& c) {
  Grid g = grid_from_config(c.cfg);
  std::string source = c.cfg.get_string_or("source", "ground");
  std::vector<double> eps_list = c.cfg.get_number_list("eps_list");

  Point center = origin();
  if (c.cfg.has("center")) {
    std::vector<double> cc = c.cfg.get_number_list("center");
    if (static_cast<int>(cc.size()) != g.n)
      throw_config("center needs exactly n = d*N entries, got " + std::to_string(cc.size()));
    for (std::size_t i = 0; i < cc.size(); ++i) center[i] = cc[i];
  }

  std::vector<int> k_list;
  if (c.cfg.has("k_list")) {
    for (double k : c.cfg.get_number_list("k_list")) {
      if (k != std::floor(k) || k < 2)
        throw_config("k_list entries must be integers >= 2");
      k_list.push_back(static_cast<int>(k));
    }
  }

  GridFunction psi;
  AssembledPotential V;
  std::string source_desc;
  SpectralResult sr;
  bool solved = false;

  if (source == "ground") {
    PotentialSpec v = potential_from_config(c.cfg, "v", true);
    PotentialSpec w = potential_from_config(c.cfg, "w", false);
    SolverParams sp = solver_from_config(c.cfg, c.opt, true);
    c.seal_config();

    c.stage("assemble");
    Hamiltonian ham = build_hamiltonian(v, w, g, sp.spectral);
    c.stage("solve");
    std::optional<Operator> precond;
    const Operator* pp = nullptr;
    if (g.boundary == Boundary::periodic) {
      precond = kinetic_preconditioner(g, sp.spectral);
      pp = &*precond;
    }
    sr = solve_ground(ham.op, sp.k, sp.tol, sp.seed, sp.max_iter, pp);
    c.man.solver_ok = sr.converged;
    solved = true;
    psi = sr.eigenvectors.at(0);
    // The scan checks lap psi = V psi, so shift the assembled potential by
    // the ground energy: (-lap + V) psi = E psi  =>  lap psi = (V - E) psi.
    V = ham.potential;
    for (double& x : V.values) x -= sr.eigenvalues.at(0);
    source_desc = "ground(" + ham.potential.provenance +
                  ", E0=" + format_g17(sr.eigenvalues.at(0)) + ")";
  } else if (source == "power-bump") {
    reject_seed_override(c, "the power-bump source");
    double power = c.cfg.get_number_or("power", 12.0);
    double b = c.cfg.get_number_or("b", 0.7);
    c.seal_config();

    c.stage("manufacture");
    PowerBumpPair pair = make_power_bump(g, power, b);
    psi = std::move(pair.psi);
    V = std::move(pair.V);
    source_desc = V.provenance;
  } else {
    throw_config("ucp-scan source must be \"ground\" or \"power-bump\", got \"" + source + "\"");
  }

  c.stage("scan");
  VanishingReport vr = vanishing_order_fit(psi, center, eps_list);
  std::vector<EquivalenceReport> eq;
  eq.reserve(k_list.size());
  for (int k : k_list) eq.push_back(weighted_equivalence_identity(psi, k));
  DerivativeVanishingReport dr = derivative_vanishing_check(psi, V, center, eps_list);

  c.stage("emit");
  JsonWriter jw = c.report_head();
  append_grid_object(jw, g);
  jw.kv("source", source_desc);
  if (solved) {
    jw.key("spectral").begin_object();
    append_fields(jw, sr);
    jw.end_object();
  }
  jw.key("vanishing").begin_object();
  append_fields(jw, vr);
  jw.end_object();
  jw.key("equivalence").begin_array();
  for (const EquivalenceReport& r : eq) {
    jw.begin_object();
    append_fields(jw, r);
    jw.end_object();
  }
  jw.end_array();
  jw.key("derivative").begin_object();
  append_fields(jw, dr);
  jw.end_object();
  c.emit_report(jw);

  if (c.want_csv) {
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < dr.eps_list.size(); ++i)
      rows.push_back(csv_row({format_g17(dr.eps_list[i]), format_g17(dr.mass[i]),
                              format_g17(dr.rho1[i]), format_g17(dr.rho2[i])}));
    std::string name = "ucp-scan-table.csv";
    write_csv_file(c.dir + "/" + name,
                   {"ratio1 = grad mass / (eps^-2 ball mass), ratio2 = lap-based analogue"},
                   "eps,mass,ratio1,ratio2", rows);
    c.man.outputs.push_back(name);
  }

  if (c.want_gnuplot) {
    std::string text = "# eps mass\n";
    for (std::size_t i = 0; i < vr.eps_list.size(); ++i)
      text += format_g17(vr.eps_list[i]) + " " + format_g17(vr.masses[i]) + "\n";
    c.emit("ucp-scan-plot.dat", text);
  }

  if (c.want_psi) {
    std::string stem = c.dir + "/ucp-scan-psi";
    save_grid_function(psi, stem);
    c.man.outputs.push_back("ucp-scan-psi.bin");
    c.man.outputs.push_back("ucp-scan-psi.json");
  }
}

// ---------------------------------------------------------------------------

RunManifest run_parsed(Config cfg, const RunOptions& opt) {
  Ctx c(std::move(cfg), opt);

  std::string exp = c.cfg.get_string("experiment");
  const char* known[] = {"solve", "density", "hk-verify", "carleman", "opineq", "ucp-scan"};
  if (std::find(std::begin(known), std::end(known), exp) == std::end(known))
    throw_config("unknown experiment '" + exp +
                 "' (expected solve, density, hk-verify, carleman, opineq, ucp-scan)");
  if (!opt.expect_experiment.empty() && exp != opt.expect_experiment)
    throw_config("config declares experiment = \"" + exp + "\" but \"" +
                 opt.expect_experiment + "\" was requested");
  c.man.experiment = exp;

  // Output root: --out flag wins, then $UCPLAB_OUT, then output.dir.  The
  // config key is read either way so it stays a known key.
  std::string cfg_dir = c.cfg.get_string_or("output.dir", "ucplab-out");
  if (!opt.out_dir.empty()) {
    c.dir = opt.out_dir;
  } else if (const char* env = std::getenv("UCPLAB_OUT"); env && *env) {
    c.dir = env;
  } else {
    c.dir = cfg_dir;
  }
  c.man.out_dir = c.dir;

  std::vector<std::string> formats = c.cfg.get_string_list_or("output.formats", {"json"});
  for (const std::string& f : formats) {
    if (f == "json") continue;  // always written
    if (f == "csv") c.want_csv = true;
    else if (f == "gnuplot") c.want_gnuplot = true;
    else if (f == "psi") c.want_psi = true;
    else throw_config("unknown output format \"" + f + "\" (json, csv, gnuplot, psi)");
  }

  c.threads = opt.threads > 0 ? opt.threads
                              : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

  std::error_code ec;
  std::filesystem::create_directories(c.dir, ec);
  if (ec) throw_io("cannot create output directory " + c.dir + ": " + ec.message());

  if (exp == "solve") run_solve(c, false);
  else if (exp == "density") run_solve(c, true);
  else if (exp == "hk-verify") run_hk(c);
  else if (exp == "carleman") run_carleman(c);
  else if (exp == "opineq") run_opineq(c);
  else run_ucp_scan(c);

  c.close_stage();
  c.man.wall_seconds = seconds_since(c.run_start);

  JsonWriter jw;
  jw.begin_object();
  jw.kv("schema", "ucplab/1");
  jw.kv("artifact", "manifest");
  jw.kv("experiment", c.man.experiment);
  jw.kv("artifact_version", c.man.artifact_version);
  jw.kv("config_hash", c.man.config_hash);
  jw.kv("solver_ok", c.man.solver_ok);
  jw.key("outputs").begin_array();
  for (const std::string& o : c.man.outputs) jw.value(o);
  jw.end_array();
  jw.key("config").begin_object();
  for (const auto& [k, v] : c.echo) jw.kv(k, v);
  jw.end_object();
  jw.kv("wall_seconds", c.man.wall_seconds);
  jw.key("stages").begin_array();
  for (const StageTime& st : c.man.stages) {
    jw.begin_object();
    jw.kv("name", st.name);
    jw.kv("seconds", st.seconds);
    jw.end_object();
  }
  jw.end_array();
  jw.end_object();
  write_text_file(c.dir + "/" + c.man.experiment + "-manifest.json", jw.take());
  return c.man;
}

}  // namespace

RunManifest run_experiment(const std::string& config_path, const RunOptions& opt) {
  return run_parsed(Config::parse_file(config_path), opt);
}

RunManifest run_experiment_text(const std::string& config_text, const RunOptions& opt) {
  return run_parsed(Config::parse_text(config_text), opt);
}

}  // namespace ucplab
