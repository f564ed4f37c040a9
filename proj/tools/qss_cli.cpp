#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qss/qss.hpp"

namespace {

struct Flags {
  std::string family;
  double a = 1.0, b = 1.0, c = 1.0, N = 1.0;
  std::string spectrum_file, potential_file, format = "csv", interpolation = "monotone_cubic";
  std::vector<double> chi{0.5};
  std::size_t grid = 512, forward_samples = 16384;
  std::string out = ".";
  std::optional<double> emin, emax;
  int n_max = 10;
  double demo_a = 1.0, junction = 6.0;
  double rel_tol = 1e-10;
  bool repair = false;
  double budget = 2.0;
};

void add_source(CLI::App* cmd, Flags& f, bool file_allowed) {
  cmd->add_option("--family", f.family, "analytic spectrum family: I, II, III or IV");
  cmd->add_option("--a", f.a, "level spacing a")->capture_default_str();
  cmd->add_option("--b", f.b, "width prefactor (I, II) or exponent slope (III, IV)")->capture_default_str();
  cmd->add_option("--c", f.c, "width exponent c (families I, II)")->capture_default_str();
  cmd->add_option("--N", f.N, "width offset N (families III, IV)")->capture_default_str();
  if (file_allowed) {
    cmd->add_option("--spectrum-file", f.spectrum_file, "levels as CSV (n,re_e,im_e) or JSON");
    cmd->add_option("--interpolation", f.interpolation, "monotone_cubic, linear or cubic_spline")->capture_default_str();
    cmd->add_flag("--repair", f.repair, "replace a non-increasing ln|Im E| by its isotonic fit");
    cmd->add_option("--extrapolation-budget", f.budget, "extrapolation range in data spans")->capture_default_str();
  }
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--format", f.format, "table format: csv or json")->capture_default_str();
  cmd->add_option("--grid", f.grid, "energy grid size (>= 64)")->capture_default_str();
  cmd->add_option("--rel-tol", f.rel_tol, "relative quadrature tolerance")->capture_default_str();
}

void add_inverse(CLI::App* cmd, Flags& f) {
  cmd->add_option("--emin", f.emin, "override the well bottom E_min");
  cmd->add_option("--emax", f.emax, "override the barrier top E_max");
}

void add_chi(CLI::App* cmd, Flags& f) {
  cmd->add_option("--chi", f.chi, "chi values in [0, 1], comma separated")->delimiter(',')->capture_default_str();
}

qss::RunConfig to_config(qss::Command command, const Flags& f) {
  qss::RunConfig c;
  c.command = command;
  if (!f.family.empty()) {
    qss::AnalyticSource s;
    s.family = qss::parse_family(f.family);
    s.a = f.a;
    s.b = f.b;
    s.third = (s.family == qss::Family::I || s.family == qss::Family::II) ? f.c : f.N;
    c.analytic = s;
  }
  if (!f.spectrum_file.empty()) c.spectrum_file = f.spectrum_file;
  if (!f.potential_file.empty()) c.potential_file = f.potential_file;
  c.chi = f.chi;
  c.grid = f.grid;
  c.tol.rel = f.rel_tol;
  c.out = f.out;
  c.format = qss::parse_format(f.format);
  c.e_min = f.emin;
  c.e_max = f.emax;
  c.n_max = f.n_max;
  c.demo_a = f.demo_a;
  c.junction = f.junction;
  c.fit.interpolation = qss::parse_interpolation(f.interpolation);
  c.fit.repair = f.repair;
  c.fit.extrapolation_budget = f.budget;
  c.forward_samples = f.forward_samples;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-stationary states: forward WKB spectra and inverse potential reconstruction"};
  app.require_subcommand(1);
  Flags f;

  auto* fwd = app.add_subcommand("forward", "levels and T(E) of the demo potential or a potential file");
  fwd->add_option("--potential-file", f.potential_file, "x,V polyline (e.g. a reconstructed potential)");
  fwd->add_option("--n-max", f.n_max, "highest level index")->capture_default_str();
  fwd->add_option("--demo-a", f.demo_a, "demo well curvature: V = (a^2/4) x^2")->capture_default_str();
  fwd->add_option("--junction", f.junction, "demo well/barrier junction position")->capture_default_str();
  add_common(fwd, f);

  auto* inv = app.add_subcommand("invert", "widths L1, L2 and T(E) from a spectrum");
  add_source(inv, f, true);
  add_inverse(inv, f);
  add_common(inv, f);

  auto* rec = app.add_subcommand("reconstruct", "potentials V_chi(x) from a spectrum");
  add_source(rec, f, true);
  add_inverse(rec, f);
  add_chi(rec, f);
  add_common(rec, f);

  auto* rt = app.add_subcommand("roundtrip", "invert, reconstruct and re-solve an analytic spectrum");
  add_source(rt, f, false);
  add_inverse(rt, f);
  add_chi(rt, f);
  add_common(rt, f);
  rt->add_option("--forward-samples", f.forward_samples, "energies per reconstructed branch")->capture_default_str();

  auto* orc = app.add_subcommand("oracle", "closed-form E_max, verdicts and widths of an analytic family");
  add_source(orc, f, false);
  add_chi(orc, f);
  add_common(orc, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? qss::kExitOk : qss::kExitHardError;
  }

  qss::Command command = qss::Command::invert;
  if (*fwd) command = qss::Command::forward;
  else if (*rec) command = qss::Command::reconstruct;
  else if (*rt) command = qss::Command::roundtrip;
  else if (*orc) command = qss::Command::oracle;

  try {
    const auto result = qss::run_command(to_config(command, f));
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& p : result.files) std::cout << p << '\n';
    return result.exit_code;
  } catch (const qss::StageError& e) {
    std::string msg = e.what();
    if (msg.starts_with(e.stage + ": ")) msg.erase(0, e.stage.size() + 2);
    std::cerr << "error [" << e.stage << "]: " << msg << '\n';
  } catch (const qss::InvalidParameters& e) {
    std::cerr << "error [config]: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return qss::kExitHardError;
}
