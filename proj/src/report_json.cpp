#include "ucplab/report_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ucplab/errors.hpp"

namespace ucplab {

std::string format_g17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace

void JsonWriter::newline_indent() {
  out_ += '\n';
  out_.append(2 * stack_.size(), ' ');
}

void JsonWriter::separate() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (need_comma_) out_ += ',';
  if (!stack_.empty()) newline_indent();
}

JsonWriter& JsonWriter::begin_object() {
  separate();
  out_ += '{';
  stack_.push_back('o');
  need_comma_ = false;
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  if (stack_.empty() || stack_.back() != 'o' || after_key_)
    throw_config("json writer: unbalanced end_object");
  bool had_members = need_comma_;
  stack_.pop_back();
  if (had_members) newline_indent();
  out_ += '}';
  need_comma_ = true;
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separate();
  out_ += '[';
  stack_.push_back('a');
  need_comma_ = false;
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  if (stack_.empty() || stack_.back() != 'a' || after_key_)
    throw_config("json writer: unbalanced end_array");
  bool had_members = need_comma_;
  stack_.pop_back();
  if (had_members) newline_indent();
  out_ += ']';
  need_comma_ = true;
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
  if (stack_.empty() || stack_.back() != 'o' || after_key_)
    throw_config("json writer: key outside an object");
  if (need_comma_) out_ += ',';
  newline_indent();
  out_ += '"';
  out_ += json_escape(k);
  out_ += "\": ";
  after_key_ = true;
  need_comma_ = false;
  return *this;
}

JsonWriter& JsonWriter::value(double x) {
  separate();
  if (std::isfinite(x)) {
    out_ += format_g17(x);
  } else {
    out_ += '"';
    out_ += format_g17(x);
    out_ += '"';
  }
  need_comma_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& s) {
  separate();
  out_ += '"';
  out_ += json_escape(s);
  out_ += '"';
  need_comma_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(const char* s) { return value(std::string(s)); }

JsonWriter& JsonWriter::value(bool b) {
  separate();
  out_ += b ? "true" : "false";
  need_comma_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(int x) { return value(static_cast<std::int64_t>(x)); }

JsonWriter& JsonWriter::value(std::int64_t x) {
  separate();
  out_ += std::to_string(x);
  need_comma_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t x) {
  separate();
  out_ += std::to_string(x);
  need_comma_ = true;
  return *this;
}

JsonWriter& JsonWriter::kv(const std::string& k, const std::vector<double>& xs) {
  key(k).begin_array();
  for (double x : xs) value(x);
  return end_array();
}

std::string JsonWriter::take() {
  if (!stack_.empty() || after_key_) throw_config("json writer: document left unbalanced");
  out_ += '\n';
  return std::move(out_);
}

void append_fields(JsonWriter& w, const Grid& g) {
  w.kv("d", g.d).kv("N", g.N).kv("n", g.n).kv("m", g.m).kv("L", g.L).kv("h", g.h);
  w.kv("boundary", to_string(g.boundary));
  w.kv("points", g.points());
}

void append_fields(JsonWriter& w, const SpectralResult& r) {
  w.kv("eigenvalues", r.eigenvalues);
  w.kv("residuals", r.residuals);
  w.kv("iterations", r.iterations);
  w.kv("converged", r.converged);
  w.kv("degenerate", r.degenerate);
  w.kv("tol", r.tol);
  w.kv("trace", r.trace);
}

void append_fields(JsonWriter& w, const DensityProfile& rho) {
  double total = 0.0, mn = 0.0, mx = 0.0;
  if (!rho.rho.empty()) mn = mx = rho.rho[0];
  for (double x : rho.rho) {
    total += x;
    mn = std::min(mn, x);
    mx = std::max(mx, x);
  }
  w.kv("mass", total * rho.grid1.cell_volume());
  w.kv("min", mn).kv("max", mx);
  w.kv("clamped_negative", rho.clamped_negative);
  w.key("grid1").begin_object();
  append_fields(w, rho.grid1);
  w.end_object();
}

void append_fields(JsonWriter& w, const HKReport& r) {
  w.kv("E1", r.E1).kv("E2", r.E2);
  w.kv("density_gap_l1", r.density_gap_l1);
  w.kv("density_gap_l2", r.density_gap_l2);
  w.kv("cross_energy_gap_1", r.cross_energy_gap_1);
  w.kv("cross_energy_gap_2", r.cross_energy_gap_2);
  w.kv("identity_gap", r.identity_gap);
  w.kv("recovered_c", r.recovered_c);
  w.kv("c_formula", r.c_formula);
  w.kv("residual_weighted", r.residual_weighted);
  w.kv("mask_fraction", r.mask_fraction);
  w.kv("mask_warning", r.mask_warning);
  w.kv("degenerate", r.degenerate);
  w.kv("converged", r.converged);
  w.kv("iterations_1", r.iterations_1);
  w.kv("iterations_2", r.iterations_2);
}

void append_fields(JsonWriter& w, const VanishingReport& r) {
  w.key("center").begin_array();
  for (double x : r.center) w.value(x);
  w.end_array();
  w.kv("eps_list", r.eps_list);
  w.kv("masses", r.masses);
  w.key("ball_points").begin_array();
  for (std::uint64_t p : r.ball_points) w.value(p);
  w.end_array();
  w.kv("fitted_order", r.fitted_order);
  w.kv("c_k_estimates", r.c_k_estimates);
  w.kv("zero_fraction", r.zero_fraction);
  w.kv("mass_floor", r.mass_floor);
  w.kv("radii_used", static_cast<std::uint64_t>(r.radii_used));
  w.kv("infinite_order_threshold", r.infinite_order_threshold);
  w.kv("effectively_zero", r.effectively_zero);
}

void append_fields(JsonWriter& w, const EquivalenceReport& r) {
  w.kv("k", r.k);
  w.kv("lhs", r.lhs).kv("rhs", r.rhs);
  w.kv("rel_gap", r.rel_gap);
  w.kv("lower_limit", r.lower_limit);
  w.kv("cells", r.cells);
  w.kv("lhs_refined", r.lhs_refined);
  w.kv("rel_gap_refined", r.rel_gap_refined);
  w.kv("lhs_half_limit", r.lhs_half_limit);
  w.kv("half_limit_shift", r.half_limit_shift);
}

void append_fields(JsonWriter& w, const DerivativeVanishingReport& r) {
  w.key("center").begin_array();
  for (double x : r.center) w.value(x);
  w.end_array();
  w.kv("eps_list", r.eps_list);
  w.kv("mass", r.mass);
  w.kv("grad_mass", r.grad_mass);
  w.kv("lap_mass", r.lap_mass);
  w.kv("rho1", r.rho1);
  w.kv("rho2", r.rho2);
  w.kv("rho2_split", r.rho2_split);
  w.kv("rho1_bounded", r.rho1_bounded);
  w.kv("rho2_bounded", r.rho2_bounded);
  w.kv("equation_residual", r.equation_residual);
}

void append_fields(JsonWriter& w, const SymbolInequalityReport& r) {
  w.kv("samples", r.samples);
  w.kv("violations", r.violations);
  w.kv("max_ratio", r.max_ratio);
  w.kv("lowband_violations", r.lowband_violations);
  w.kv("lowband_max_ratio", r.lowband_max_ratio);
}

void append_fields(JsonWriter& w, const CarlemanReport& r) {
  w.kv("s", r.s).kv("xi", r.xi).kv("delta", r.delta);
  w.kv("d", r.d).kv("N", r.N);
  w.kv("tau_list", r.tau_list);
  w.kv("kappa_tau", r.kappa_tau);
  w.kv("kappa_hat", r.kappa_hat);
  w.kv("tau0", r.tau0);
  w.kv("slope_log_kappa_vs_log_tau", r.slope_log_kappa_vs_log_tau);
  w.kv("eps_main", r.eps_main);
  w.kv("eps_dN", r.eps_dN);
  w.key("ratios").begin_array();
  for (const RatioSample& s : r.ratios) {
    w.begin_object();
    w.kv("function_id", s.function_id);
    w.kv("tau", s.tau);
    w.kv("ratio", s.ratio);
    w.kv("admissible", s.admissible);
    w.end_object();
  }
  w.end_array();
}

void append_fields(JsonWriter& w, const InequalityReport& r) {
  w.kv("delta", r.delta).kv("R", r.R).kv("c", r.c);
  w.kv("eps_min", r.eps_min);
  w.kv("method", r.method);
  w.kv("solver", r.solver);
  w.kv("sigma", r.sigma);
  w.kv("eps_min_10sigma", r.eps_min_10sigma);
  w.kv("M", r.M);
  w.kv("c_certified", r.c_certified);
  w.kv("constant_label", r.constant_label);
}

void append_fields(JsonWriter& w, const SqrtMonotoneReport& r) {
  w.kv("trials", r.trials);
  w.kv("dim", r.dim);
  w.kv("violations", r.violations);
  w.kv("min_gap", r.min_gap);
  w.kv("scalar_cprime", r.scalar_cprime);
  w.kv("scalar_argmax_interior", r.scalar_argmax_interior);
}

void append_fields(JsonWriter& w, const BootstrapReport& r) {
  w.kv("delta", r.delta);
  w.kv("eps_used", r.eps_used);
  w.kv("c_used", r.c_used);
  w.kv("sigma_used", r.sigma_used);
  w.kv("measured_half", r.measured_half);
  w.kv("phi_half", r.phi_half);
  w.kv("phi_ref", r.phi_ref);
  w.kv("kappa0_hat", r.kappa0_hat);
  w.kv("decay_exponent", r.decay_exponent);
  w.kv("chain_holds", r.chain_holds);
  w.key("terms").begin_array();
  for (const BootstrapTerm& t : r.terms) {
    w.begin_object();
    w.kv("tau", t.tau);
    w.kv("W", t.W).kv("EQ", t.EQ).kv("VT", t.VT).kv("P", t.P);
    w.kv("FR", t.FR).kv("GN", t.GN).kv("RES", t.RES);
    w.kv("kappa0", t.kappa0);
    w.kv("kappa34", t.kappa34);
    w.kv("range_ok", t.range_ok);
    w.kv("triangle_ok", t.triangle_ok);
    w.kv("certificate_ok", t.certificate_ok);
    w.kv("absorb_ok", t.absorb_ok);
    w.kv("small_ok", t.small_ok);
    w.kv("final_bound", t.final_bound);
    w.kv("final_ok", t.final_ok);
    w.end_object();
  }
  w.end_array();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw_io("cannot open for writing: " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.flush();
  if (!f) throw_io("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_io("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw_io("read failed: " + path);
  return ss.str();
}

void write_csv_file(const std::string& path, const std::vector<std::string>& comments,
                    const std::string& header, const std::vector<std::string>& rows) {
  std::string out;
  for (const std::string& c : comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  out += header;
  out += '\n';
  for (const std::string& r : rows) {
    out += r;
    out += '\n';
  }
  write_text_file(path, out);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ucplab
