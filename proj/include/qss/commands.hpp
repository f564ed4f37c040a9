#pragma once

// Command layer behind the qss executable: each command reads a RunConfig,
// writes its files into the output directory and returns an exit code
// (0 success, 2 invalid spectrum with diagnostics, 1 hard error).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qss/error.hpp"
#include "qss/forward.hpp"
#include "qss/ingest.hpp"
#include "qss/inverse.hpp"
#include "qss/numerics.hpp"
#include "qss/reconstruct.hpp"
#include "qss/spectra.hpp"

namespace qss {

enum class Command { forward, invert, reconstruct, roundtrip, oracle };

inline const char* command_name(Command c) {
  switch (c) {
    case Command::forward: return "forward";
    case Command::invert: return "invert";
    case Command::reconstruct: return "reconstruct";
    case Command::roundtrip: return "roundtrip";
    case Command::oracle: return "oracle";
  }
  return "?";
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitHardError = 1;
inline constexpr int kExitInvalid = 2;

/// Analytic family selection. `third` is c for families I and II, N for III and IV.
struct AnalyticSource {
  Family family = Family::I;
  double a = 1.0, b = 1.0, third = 1.0;

  AnalyticSpectrumParams params() const { return {family, a, b, third}; }
};

struct RunConfig {
  Command command = Command::invert;
  std::optional<AnalyticSource> analytic;
  std::optional<std::string> spectrum_file;
  std::optional<std::string> potential_file;  ///< forward: x,V polyline instead of the demo
  std::vector<double> chi{0.5};
  std::size_t grid = 512;
  Tolerances tol{};
  std::string out = ".";
  SpectrumFormat format = SpectrumFormat::csv;
  std::optional<double> e_min, e_max;
  int n_max = 10;                       ///< forward: highest requested level
  double demo_a = 1.0, junction = 6.0;  ///< forward demo potential
  FitPolicy fit{};
  std::size_t forward_samples = 16384;  ///< roundtrip: energies per potential branch
};

/// Failure inside a named stage of a command.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage(std::move(stage)) {}
  std::string stage;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::string> files;     ///< written, in order
  std::vector<std::string> warnings;  ///< for stderr
};

inline void validate_config(const RunConfig& c) {
  const bool need_spectrum = c.command == Command::invert || c.command == Command::reconstruct;
  const bool need_analytic = c.command == Command::roundtrip || c.command == Command::oracle;
  if (need_spectrum && c.analytic.has_value() == c.spectrum_file.has_value())
    throw InvalidParameters("exactly one spectrum source is required: --family or --spectrum-file");
  if (need_analytic && (!c.analytic || c.spectrum_file))
    throw InvalidParameters(std::string(command_name(c.command)) + " needs an analytic --family and no spectrum file");
  if (c.command == Command::forward && (c.analytic || c.spectrum_file))
    throw InvalidParameters("forward takes a potential (--potential-file or the demo), not a spectrum");
  if (c.command != Command::forward && c.potential_file)
    throw InvalidParameters("--potential-file is only used by forward");
  if (c.chi.empty()) throw InvalidParameters("at least one chi value is required");
  for (double x : c.chi)
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidParameters("chi must lie in [0, 1]");
  if (c.grid < 64) throw InvalidParameters("grid size must be at least 64");
  if (c.n_max < 0) throw InvalidParameters("n-max must be non-negative");
  if (c.forward_samples < 64) throw InvalidParameters("forward samples must be at least 64");
  if (!(c.tol.rel > 0.0)) throw InvalidParameters("relative tolerance must be positive");
  if (c.analytic) (void)c.analytic->params();
}

namespace detail {

using Json = nlohmann::ordered_json;

inline Json json_number(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

class OutputDir {
 public:
  OutputDir(const std::string& dir, CommandResult& result) : dir_(dir), result_(result) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = (dir_ / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw Error("write to '" + path + "' failed");
    result_.files.push_back(path);
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  /// Columns of numbers as CSV with a header row, or a JSON array of objects.
  void write_table(const std::string& stem, const std::vector<std::string>& cols,
                   const std::vector<std::vector<double>>& rows, SpectrumFormat format) {
    if (format == SpectrumFormat::json) {
      Json arr = Json::array();
      for (const auto& r : rows) {
        Json o = Json::object();
        for (std::size_t k = 0; k < cols.size(); ++k) o[cols[k]] = json_number(r[k]);
        arr.push_back(std::move(o));
      }
      write(stem + ".json", arr.dump(2) + "\n");
      return;
    }
    std::string s;
    for (std::size_t k = 0; k < cols.size(); ++k) s += (k ? "," : "") + cols[k];
    s += '\n';
    for (const auto& r : rows) {
      for (std::size_t k = 0; k < r.size(); ++k) s += (k ? "," : "") + format_double(r[k]);
      s += '\n';
    }
    write(stem + ".csv", s);
  }

 private:
  std::filesystem::path dir_;
  CommandResult& result_;
};

inline std::string chi_label(double chi) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", chi);
  return buf;
}

inline Json params_json(const AnalyticSource& s) {
  Json p = Json::object();
  p["family"] = std::string(family_name(s.family));
  p["a"] = s.a;
  p["b"] = s.b;
  if (s.family == Family::I || s.family == Family::II) p["c"] = s.third;
  else p["N"] = s.third;
  return p;
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const InvalidSpectrum&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

/// x,V samples from CSV text: optional header, '#' comments, two fields per row.
inline std::vector<std::pair<double, double>> parse_potential_csv(std::string_view text) {
  std::vector<std::pair<double, double>> pts;
  std::size_t pos = 0;
  long line_no = 0;
  bool header_allowed = true;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2)
      throw ParseError("potential rows need exactly two fields x,V", line_no, static_cast<long>(fields.size()));
    if (header_allowed && lower(fields[0]) == "x" && lower(fields[1]) == "v") {
      header_allowed = false;
      continue;
    }
    header_allowed = false;
    double x, v;
    if (!parse_real(fields[0], x)) throw ParseError("x is not a finite number", line_no, 1);
    if (!parse_real(fields[1], v)) throw ParseError("V is not a finite number", line_no, 2);
    pts.emplace_back(x, v);
  }
  return pts;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline Json report_json(const ModelReport& r) {
  Json j = Json::object();
  j["n_increasing"] = r.n_increasing;
  j["log_width_increasing"] = r.log_width_increasing;
  j["warnings"] = r.warnings;
  return j;
}

inline Json diagnostics_json(const std::string& source, const InversionDiagnostics& d, std::size_t grid,
                             const std::vector<std::string>& model_warnings) {
  auto opt_bool = [](const std::optional<bool>& b) -> Json {
    if (!b) return nullptr;
    return *b;
  };
  Json j = Json::object();
  j["source"] = source;
  j["status"] = status_name(d.status);
  j["failed_stage"] = d.failed_stage.empty() ? Json(nullptr) : Json(d.failed_stage);
  j["e_min"] = json_number(d.e_min);
  j["e_max"] = json_number(d.e_max);
  j["n_at_emax"] = json_number(d.n_at_emax);
  Json v = Json::object();
  v["n_increasing"] = opt_bool(d.n_increasing);
  v["T_increasing"] = opt_bool(d.T_increasing);
  v["L1_increasing"] = opt_bool(d.L1_increasing);
  v["L2_decreasing"] = opt_bool(d.L2_decreasing);
  j["verdicts"] = v;
  if (d.L2_increasing_on) j["L2_increasing_interval"] = Json::array({d.L2_increasing_on->e_min, d.L2_increasing_on->e_max});
  else j["L2_increasing_interval"] = nullptr;
  Json x = Json::object();
  x["e_min_below_data"] = d.emin_extrapolation;
  x["e_max_above_data"] = d.emax_extrapolation;
  x["data_span"] = d.data_span;
  j["extrapolation"] = x;
  j["grid_size"] = grid;
  j["messages"] = d.messages;
  j["model_warnings"] = model_warnings;
  return j;
}

inline int exit_code(InversionStatus s) {
  switch (s) {
    case InversionStatus::valid: return kExitOk;
    case InversionStatus::invalid: return kExitInvalid;
    case InversionStatus::failed: return kExitHardError;
  }
  return kExitHardError;
}

struct InvertRun {
  std::optional<SpectrumModel> model;
  InversionResult result;
  int exit_code = kExitOk;
};

/// Shared by invert, reconstruct and roundtrip: builds the model, runs the
/// pipeline and writes widths, transmission and diagnostics.
inline InvertRun run_invert(const RunConfig& c, OutputDir& out, CommandResult& res) {
  InvertRun run;
  std::string source;
  std::vector<std::string> model_warnings;
  auto fail_early = [&](const std::string& stage_name, const Error& e, InversionStatus status) {
    run.result.diagnostics.status = status;
    run.result.diagnostics.failed_stage = stage_name;
    run.result.diagnostics.messages.push_back(stage_message(stage_name, e.what()));
    out.write_json("diagnostics.json", diagnostics_json(source, run.result.diagnostics, c.grid, model_warnings));
    run.exit_code = exit_code(status);
  };

  if (c.analytic) {
    const auto p = c.analytic->params();
    run.model = analytic_model(p);
    source = run.model->source;
  } else {
    source = *c.spectrum_file;
    DiscreteSpectrum spec;
    try {
      spec = load_spectrum(*c.spectrum_file);
    } catch (const InvalidSpectrum& e) {
      fail_early("ingest", e, InversionStatus::invalid);
      return run;
    } catch (const Error& e) {
      fail_early("ingest", e, InversionStatus::failed);
      return run;
    }
    try {
      run.model = fit_continuum(spec, c.fit);
    } catch (const InvalidSpectrum& e) {
      fail_early("fit_continuum", e, InversionStatus::invalid);
      return run;
    } catch (const Error& e) {
      fail_early("fit_continuum", e, InversionStatus::failed);
      return run;
    }
    model_warnings = run.model->warnings;
  }

  InversionOptions opt;
  opt.e_min = c.e_min;
  opt.e_max = c.e_max;
  opt.grid_size = c.grid;
  opt.tol = c.tol;
  run.result = invert_spectrum(*run.model, opt);
  const auto& r = run.result;

  if (r.widths) {
    const auto g = r.widths->L1.grid();
    const auto l1 = r.widths->L1.values(), l2 = r.widths->L2.values();
    std::vector<std::vector<double>> rows;
    rows.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) rows.push_back({g[i], l1[i], l2[i]});
    out.write_table("widths", {"E", "L1", "L2"}, rows, c.format);
  }
  if (r.transmission) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.transmission->grid.size(); ++i)
      rows.push_back({r.transmission->grid[i], std::exp(r.transmission->log_T_samples[i])});
    out.write_table("transmission", {"E", "T"}, rows, c.format);
  }
  out.write_json("diagnostics.json", diagnostics_json(source, r.diagnostics, c.grid, model_warnings));
  for (const auto& m : r.diagnostics.messages) res.warnings.push_back(m);
  run.exit_code = exit_code(r.diagnostics.status);
  return run;
}

}  // namespace detail

/// Forward solve of the demo or a potential file: spectrum and T(E).
inline CommandResult cmd_forward(const RunConfig& c) {
  validate_config(c);
  CommandResult res;
  detail::OutputDir out(c.out, res);
  const PotentialFunction v = detail::stage("potential", [&] {
    if (c.potential_file)
      return potential_from_samples(detail::parse_potential_csv(detail::read_file(*c.potential_file)));
    return harmonic_barrier_demo(c.demo_a, c.junction);
  });
  const ForwardSpectrum fs = detail::stage("forward_spectrum", [&] { return forward_spectrum(v, c.n_max, c.tol); });
  if (fs.truncated > 0)
    res.warnings.push_back("truncated: " + std::to_string(fs.truncated) + " requested level(s) lie above the barrier top E_max = " +
                           format_double(v.e_max()));
  out.write(c.format == SpectrumFormat::json ? "spectrum.json" : "spectrum.csv", serialize_spectrum(fs.spectrum, c.format));
  // A truncated outer tail (sampled potentials) bounds the energies that can tunnel out.
  const double tail = v(v.x_hi());
  const double t_lo = std::max(v.e_min(), tail);
  if (tail > v.e_min())
    res.warnings.push_back("transmission starts at E = " + format_double(tail) +
                           ", where the outer tail of the potential ends");
  const auto rows = detail::stage("transmission_forward", [&] {
    std::vector<std::vector<double>> r;
    for (double e : clustered_grid(t_lo, v.e_max(), c.grid)) r.push_back({e, transmission_forward(v, e, c.tol)});
    return r;
  });
  out.write_table("transmission", {"E", "T"}, rows, c.format);
  return res;
}

/// Inverse pipeline: widths, transmission and diagnostics (always written).
inline CommandResult cmd_invert(const RunConfig& c) {
  validate_config(c);
  CommandResult res;
  detail::OutputDir out(c.out, res);
  res.exit_code = detail::run_invert(c, out, res).exit_code;
  return res;
}

/// Inversion followed by one potential per chi and the validity report.
inline CommandResult cmd_reconstruct(const RunConfig& c) {
  validate_config(c);
  CommandResult res;
  detail::OutputDir out(c.out, res);
  auto run = detail::run_invert(c, out, res);
  if (!run.result.widths) {
    res.exit_code = run.exit_code == kExitOk ? kExitHardError : run.exit_code;
    return res;
  }
  const auto& w = *run.result.widths;
  const auto grid = potential_grid(w.e_min, w.e_max, c.grid);

  detail::Json report = detail::Json::object();
  report["e_min"] = w.e_min;
  report["e_max"] = w.e_max;
  report["inversion_status"] = status_name(run.result.diagnostics.status);
  detail::Json entries = detail::Json::array();
  bool any_valid = false;
  for (double chi : c.chi) {
    const std::string label = detail::chi_label(chi);
    const auto map = detail::stage("chi_turning_points", [&] { return resample(chi_turning_points(w, chi), grid); });
    const auto verdict = detail::stage("validate_turning_points", [&] { return validate_turning_points(map, c.tol); });

    std::vector<std::vector<double>> tp;
    const auto g = map.x0.grid();
    for (std::size_t i = 0; i < g.size(); ++i) tp.push_back({g[i], map.x0.values()[i], map.x1.values()[i], map.x2.values()[i]});
    out.write_table("turning_points_chi_" + label, {"E", "x0", "x1", "x2"}, tp, c.format);

    detail::Json e = detail::Json::object();
    e["chi"] = chi;
    e["valid"] = verdict.valid;
    e["verdict"] = verdict.message;
    e["e_c"] = detail::json_number(verdict.e_c);
    e["violated"] = verdict.violated ? detail::Json(turning_point_name(*verdict.violated)) : detail::Json(nullptr);
    if (verdict.valid) {
      const auto pot = detail::stage("build_potential", [&] { return build_potential(map, c.tol); });
      std::vector<std::vector<double>> rows;
      for (const auto& [x, v] : pot.samples()) rows.push_back({x, v});
      out.write_table("potential_chi_" + label, {"x", "V"}, rows, c.format);
      e["file"] = std::string("potential_chi_") + label + (c.format == SpectrumFormat::json ? ".json" : ".csv");
      any_valid = true;
    } else {
      e["file"] = nullptr;
      res.warnings.push_back("chi = " + label + ": " + verdict.message);
    }
    entries.push_back(std::move(e));
  }
  report["chi"] = std::move(entries);
  out.write_json("validity.json", report);
  if (run.exit_code != kExitOk) res.exit_code = run.exit_code;
  else res.exit_code = any_valid ? kExitOk : kExitInvalid;
  return res;
}

/// invert -> reconstruct -> forward, compared level by level with the formula.
/// Compared levels are 2 <= n <= n(E_max) - 2. When x2 overhangs, only the
/// well is rebuilt and only real parts are compared.
inline CommandResult cmd_roundtrip(const RunConfig& c) {
  validate_config(c);
  CommandResult res;
  detail::OutputDir out(c.out, res);
  auto run = detail::run_invert(c, out, res);
  const auto p = c.analytic->params();

  detail::Json report = detail::Json::object();
  report["params"] = detail::params_json(*c.analytic);
  report["inversion_status"] = status_name(run.result.diagnostics.status);
  if (!run.result.widths) {
    report["note"] = "inversion produced no widths";
    report["results"] = detail::Json::array();
    out.write_json("roundtrip.json", report);
    res.exit_code = run.exit_code == kExitOk ? kExitHardError : run.exit_code;
    return res;
  }
  const auto& w = *run.result.widths;
  const double n_top = *run.result.diagnostics.n_at_emax;
  report["e_max"] = w.e_max;
  report["n_at_emax"] = n_top;
  const int n_lo = 2;
  const int n_hi = static_cast<int>(std::floor(n_top - 2.0));
  report["levels_compared"] = n_hi >= n_lo ? detail::Json::array({n_lo, n_hi}) : detail::Json(nullptr);
  const auto grid = potential_grid(w.e_min, w.e_max, c.forward_samples);

  detail::Json results = detail::Json::array();
  for (double chi : c.chi) {
    detail::Json e = detail::Json::object();
    e["chi"] = chi;
    const auto map = detail::stage("chi_turning_points", [&] { return resample(chi_turning_points(w, chi), grid); });
    const auto verdict = detail::stage("validate_turning_points", [&] { return validate_turning_points(map, c.tol); });
    e["valid"] = verdict.valid;
    e["verdict"] = verdict.message;
    e["levels"] = detail::Json::array();
    e["max_re_rel_error"] = nullptr;
    e["max_im_rel_error"] = nullptr;
    if (n_hi < n_lo) {
      e["note"] = "no comparable levels";
      results.push_back(std::move(e));
      continue;
    }
    const bool well_only = !verdict.valid;
    if (well_only && verdict.violated != TurningPoint::x2) {
      e["note"] = "well turning points not monotone: nothing to compare";
      results.push_back(std::move(e));
      continue;
    }
    if (well_only) e["note"] = "barrier overhangs: well-only potential, imaginary parts not comparable";
    const auto v = detail::stage("build_potential", [&] {
      return as_potential_function(build_potential(map, c.tol, well_only));
    });
    double max_re = 0.0, max_im = 0.0;
    for (int n = n_lo; n <= n_hi; ++n) {
      const auto want = eval_level(p, n);
      detail::Json l = detail::Json::object();
      l["n"] = n;
      const double re = detail::stage("bs_level", [&] { return bs_level(v, n, c.tol); });
      const double re_err = std::abs(re - want.e0) / std::abs(want.e0);
      l["re_expected"] = want.e0;
      l["re_found"] = re;
      l["re_rel_error"] = re_err;
      max_re = std::max(max_re, re_err);
      if (!well_only) {
        const double im = detail::stage("gamow_imag", [&] { return gamow_imag(v, re, c.tol); });
        const double im_err = std::abs(im - want.e1) / std::abs(want.e1);
        l["im_expected"] = want.e1;
        l["im_found"] = im;
        l["im_rel_error"] = im_err;
        max_im = std::max(max_im, im_err);
      } else {
        l["im_expected"] = want.e1;
        l["im_found"] = nullptr;
        l["im_rel_error"] = nullptr;
      }
      e["levels"].push_back(std::move(l));
    }
    e["max_re_rel_error"] = max_re;
    e["max_im_rel_error"] = well_only ? detail::Json(nullptr) : detail::Json(max_im);
    results.push_back(std::move(e));
  }
  report["results"] = std::move(results);
  out.write_json("roundtrip.json", report);
  return res;
}

/// Closed forms of an analytic family: E_max, n(E_max), per-chi verdicts and
/// T, L1, L2 on the energy grid.
inline CommandResult cmd_oracle(const RunConfig& c) {
  validate_config(c);
  CommandResult res;
  detail::OutputDir out(c.out, res);
  const auto p = c.analytic->params();
  const auto base = oracle_diagnostics(p);

  detail::Json report = detail::Json::object();
  report["params"] = detail::params_json(*c.analytic);
  report["e_min"] = 0.0;
  report["e_max"] = detail::json_number(base.e_max);
  report["n_at_emax"] = detail::json_number(base.n_at_emax);
  report["valid"] = base.valid;
  report["verdict"] = base.verdict;
  detail::Json per_chi = detail::Json::array();
  if (base.e_max) {
    for (double chi : c.chi) {
      const auto r = detail::stage("oracle_diagnostics", [&] { return oracle_diagnostics(p, chi); });
      detail::Json e = detail::Json::object();
      e["chi"] = chi;
      e["valid"] = r.valid;
      e["verdict"] = r.verdict;
      e["e_c"] = detail::json_number(r.e_c);
      per_chi.push_back(std::move(e));
    }
    std::vector<std::vector<double>> rows;
    for (double e : clustered_grid(0.0, *base.e_max, c.grid))
      rows.push_back({e, oracle_transmission(p, e), 4.0 / p.a() * std::sqrt(e), oracle_L2(p, e)});
    out.write_table("oracle", {"E", "T", "L1", "L2"}, rows, c.format);
  }
  report["chi"] = std::move(per_chi);
  out.write_json("oracle.json", report);
  return res;
}

inline CommandResult run_command(const RunConfig& c) {
  switch (c.command) {
    case Command::forward: return cmd_forward(c);
    case Command::invert: return cmd_invert(c);
    case Command::reconstruct: return cmd_reconstruct(c);
    case Command::roundtrip: return cmd_roundtrip(c);
    case Command::oracle: return cmd_oracle(c);
  }
  throw InvalidParameters("unknown command");
}

}  // namespace qss
