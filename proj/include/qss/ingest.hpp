#pragma once

// Discrete spectra in and out: CSV / JSON parsing and serialization, the
// continuous fit n(E), ln(-E1(E)) used by the inverse pipeline, and the
// model validity report.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qss/error.hpp"
#include "qss/interpolation.hpp"
#include "qss/inverse.hpp"
#include "qss/model.hpp"

namespace qss {

enum class SpectrumFormat { csv, json };

inline SpectrumFormat parse_format(std::string_view s) {
  if (s == "csv") return SpectrumFormat::csv;
  if (s == "json") return SpectrumFormat::json;
  throw InvalidParameters("unknown format '" + std::string(s) + "' (expected csv or json)");
}

/// "%.17g": enough digits for an exact decimal round trip of any double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_int(std::string_view s, int& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::string lower(std::string_view s) {
  std::string r(s);
  for (auto& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return r;
}

// Re-throws a level-invariant violation with the source row instead of the level index.
inline DiscreteSpectrum checked_spectrum(std::vector<ComplexLevel> levels, const std::vector<long>& rows) {
  try {
    return DiscreteSpectrum(std::move(levels));
  } catch (const InvalidSpectrum& e) {
    const long row = e.row >= 1 && static_cast<std::size_t>(e.row) <= rows.size() ? rows[e.row - 1] : e.row;
    std::string msg = e.what();
    if (const auto p = msg.rfind(" (row "); p != std::string::npos) msg.erase(p);
    throw InvalidSpectrum(msg, row);
  }
}

inline DiscreteSpectrum parse_csv(std::string_view text) {
  std::vector<ComplexLevel> levels;
  std::vector<long> rows;
  long line_no = 0;
  bool seen_data_or_header = false;
  std::size_t pos = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (!seen_data_or_header) {
      seen_data_or_header = true;
      int probe;
      if (!parse_int(f[0], probe)) {
        if (f.size() != 3 || lower(f[0]) != "n" || lower(f[1]) != "re_e" || lower(f[2]) != "im_e")
          throw ParseError("header must be 'n,re_e,im_e'", line_no, 1);
        continue;
      }
    }
    if (f.size() != 3)
      throw ParseError("expected 3 fields, found " + std::to_string(f.size()), line_no,
                       f.size() < 3 ? static_cast<long>(f.size()) + 1 : 4);
    ComplexLevel l;
    if (!parse_int(f[0], l.n)) throw ParseError("level index is not an integer: '" + std::string(f[0]) + "'", line_no, 1);
    if (!parse_real(f[1], l.e0)) throw ParseError("real part is not a finite number: '" + std::string(f[1]) + "'", line_no, 2);
    if (!parse_real(f[2], l.e1))
      throw ParseError("imaginary part is not a finite number: '" + std::string(f[2]) + "'", line_no, 3);
    levels.push_back(l);
    rows.push_back(line_no);
  }
  if (levels.empty()) throw InvalidSpectrum("spectrum contains no levels");
  return checked_spectrum(std::move(levels), rows);
}

inline DiscreteSpectrum parse_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), -1, static_cast<long>(e.byte));
  }
  if (!doc.is_array()) throw ParseError("spectrum JSON must be an array of levels", 0, 0);
  std::vector<ComplexLevel> levels;
  std::vector<long> rows;
  long row = 0;
  for (const auto& item : doc) {
    ++row;
    if (!item.is_object()) throw ParseError("level entry is not an object", row, 0);
    auto field = [&](const char* key, long col) -> const nlohmann::json& {
      auto it = item.find(key);
      if (it == item.end()) throw ParseError(std::string("missing field '") + key + "'", row, col);
      return *it;
    };
    const auto& n = field("n", 1);
    const auto& re = field("re", 2);
    const auto& im = field("im", 3);
    if (!n.is_number_integer()) throw ParseError("field 'n' must be an integer", row, 1);
    if (!re.is_number()) throw ParseError("field 're' must be a number", row, 2);
    if (!im.is_number()) throw ParseError("field 'im' must be a number", row, 3);
    const auto ni = n.get<long long>();
    if (ni < 0 || ni > 1'000'000'000) throw ParseError("field 'n' out of range", row, 1);
    levels.push_back({static_cast<int>(ni), re.get<double>(), im.get<double>()});
    rows.push_back(row);
  }
  if (levels.empty()) throw InvalidSpectrum("spectrum contains no levels");
  return checked_spectrum(std::move(levels), rows);
}

}  // namespace detail

/// Validated spectrum from CSV (`n,re_e,im_e`, optional header, `#` comments)
/// or JSON (array of {"n", "re", "im"}). Syntax problems raise ParseError with
/// row and column; level invariants raise InvalidSpectrum with the row.
inline DiscreteSpectrum parse_spectrum(std::string_view text, SpectrumFormat format) {
  return format == SpectrumFormat::csv ? detail::parse_csv(text) : detail::parse_json(text);
}

inline DiscreteSpectrum parse_spectrum(std::istream& in, SpectrumFormat format) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_spectrum(text, format);
}

/// Format from the file extension (.json, otherwise CSV).
inline DiscreteSpectrum load_spectrum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open spectrum file '" + path + "'");
  const bool json = path.size() >= 5 && detail::lower(path.substr(path.size() - 5)) == ".json";
  return parse_spectrum(in, json ? SpectrumFormat::json : SpectrumFormat::csv);
}

inline std::string serialize_spectrum(const DiscreteSpectrum& s, SpectrumFormat format) {
  std::string out;
  if (format == SpectrumFormat::csv) {
    out = "n,re_e,im_e\n";
    for (const auto& l : s.levels())
      out += std::to_string(l.n) + "," + format_double(l.e0) + "," + format_double(l.e1) + "\n";
    return out;
  }
  out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& l = s[i];
    out += i ? ",\n  " : "\n  ";
    out += "{\"n\": " + std::to_string(l.n) + ", \"re\": " + format_double(l.e0) + ", \"im\": " + format_double(l.e1) + "}";
  }
  out += s.empty() ? "]\n" : "\n]\n";
  return out;
}

enum class Interpolation { monotone_cubic, linear, cubic_spline };

inline Interpolation parse_interpolation(std::string_view s) {
  if (s == "monotone_cubic" || s == "pchip") return Interpolation::monotone_cubic;
  if (s == "linear") return Interpolation::linear;
  if (s == "cubic_spline" || s == "spline") return Interpolation::cubic_spline;
  throw InvalidParameters("unknown interpolation '" + std::string(s) + "'");
}

inline const char* interpolation_name(Interpolation i) {
  switch (i) {
    case Interpolation::monotone_cubic: return "monotone_cubic";
    case Interpolation::linear: return "linear";
    case Interpolation::cubic_spline: return "cubic_spline";
  }
  return "?";
}

struct FitPolicy {
  Interpolation interpolation = Interpolation::monotone_cubic;
  bool repair = false;                ///< isotonic repair of a non-increasing ln|E1| (reported)
  double extrapolation_budget = 2.0;  ///< how far past the data the model may be used, in data spans
};

namespace detail {

// Pool-adjacent-violators: least-squares non-decreasing fit.
inline std::vector<double> isotonic(const std::vector<double>& y) {
  std::vector<double> level, weight;
  std::vector<std::size_t> count;
  for (double v : y) {
    level.push_back(v);
    weight.push_back(1.0);
    count.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] >= level.back()) {
      const std::size_t k = level.size() - 1;
      const double w = weight[k - 1] + weight[k];
      level[k - 1] = (level[k - 1] * weight[k - 1] + level[k] * weight[k]) / w;
      weight[k - 1] = w;
      count[k - 1] += count[k];
      level.pop_back();
      weight.pop_back();
      count.pop_back();
    }
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < level.size(); ++k) out.insert(out.end(), count[k], level[k]);
  return out;
}

inline PiecewiseCubic interpolate(Interpolation kind, std::vector<double> x, std::vector<double> y) {
  if (x.size() == 2) return piecewise_linear(std::move(x), std::move(y));
  switch (kind) {
    case Interpolation::monotone_cubic: return monotone_cubic(std::move(x), std::move(y));
    case Interpolation::linear: return piecewise_linear(std::move(x), std::move(y));
    case Interpolation::cubic_spline: return cubic_spline(std::move(x), std::move(y));
  }
  return piecewise_linear(std::move(x), std::move(y));
}

// First energy inside the knot range where the interpolant's slope is not
// positive, checked at 16 points per interval and at the knots.
inline std::optional<double> first_non_increasing(const PiecewiseCubic& p) {
  auto k = p.knots();
  for (std::size_t i = 0; i + 1 < k.size(); ++i)
    for (int j = 0; j <= 16; ++j) {
      const double x = k[i] + (k[i + 1] - k[i]) * j / 16.0;
      if (!(p.derivative(x) > 0.0)) return x;
    }
  return std::nullopt;
}

}  // namespace detail

/// Continuous model through the levels: n(E) through (e0_n, n) and
/// ln(-E1(E)) through (e0_n, ln|e1_n|), both interpolating exactly and
/// continued linearly past the data.
inline SpectrumModel fit_continuum(const DiscreteSpectrum& spec, const FitPolicy& policy = {}) {
  if (spec.size() < 2) throw InvalidSpectrum("fit_continuum needs at least two levels");
  if (!(policy.extrapolation_budget >= 0.0)) throw InvalidParameters("extrapolation budget must be non-negative");
  std::vector<double> e, n, lw;
  for (const auto& l : spec.levels()) {
    e.push_back(l.e0);
    n.push_back(l.n);
    lw.push_back(std::log(-l.e1));
  }
  SpectrumModel m;
  m.warnings = spec.warnings();
  if (spec.size() == 2) m.warnings.push_back("only two levels: linear model");

  for (std::size_t i = 1; i < lw.size(); ++i) {
    if (lw[i] > lw[i - 1]) continue;
    if (!policy.repair)
      throw InvalidSpectrum("ln|Im E| is not strictly increasing with Re E (levels " + std::to_string(spec[i - 1].n) +
                                " and " + std::to_string(spec[i].n) + "); enable repair to fit an isotonic version",
                            static_cast<long>(i) + 1);
    lw = detail::isotonic(lw);
    m.warnings.push_back(
        "REPAIRED: ln|Im E| was not increasing; replaced by its isotonic least-squares fit, the transmission is "
        "no longer the data's");
    break;
  }

  auto n_fit = std::make_shared<PiecewiseCubic>(detail::interpolate(policy.interpolation, e, n));
  auto w_fit = std::make_shared<PiecewiseCubic>(detail::interpolate(policy.interpolation, e, lw));
  if (const auto bad = detail::first_non_increasing(*n_fit))
    throw InvalidSpectrum(std::string("fitted n(E) is not increasing near E = ") + std::to_string(*bad) + " with " +
                          interpolation_name(policy.interpolation) +
                          " interpolation; use a lower-order (monotone) interpolant");
  // Isotonic plateaus are expected after a repair.
  if (const auto bad = detail::first_non_increasing(*w_fit); bad && !policy.repair)
    throw InvalidSpectrum(std::string("fitted ln|E1(E)| is not increasing near E = ") + std::to_string(*bad) +
                            " with " + interpolation_name(policy.interpolation) +
                          " interpolation; use a lower-order (monotone) interpolant");

  m.n_of_E = [n_fit](double x) { return (*n_fit)(x); };
  m.dn_dE = [n_fit](double x) { return n_fit->derivative(x); };
  m.d2n_dE2 = [n_fit](double x) { return n_fit->second_derivative(x); };
  m.d3n_dE3 = [n_fit](double x) { return n_fit->third_derivative(x); };
  m.log_width = [w_fit](double x) { return (*w_fit)(x); };
  m.dlog_width_dE = [w_fit](double x) { return w_fit->derivative(x); };
  m.d2log_width_dE2 = [w_fit](double x) { return w_fit->second_derivative(x); };
  m.domain = EnergyInterval(e.front(), e.back());
  const double span = e.back() - e.front();
  m.admissible = EnergyInterval(e.front() - policy.extrapolation_budget * span,
                                e.back() + policy.extrapolation_budget * span);
  m.breakpoints = e;
  m.analytic = false;
  m.source = "fit of " + std::to_string(spec.size()) + " levels (" + interpolation_name(policy.interpolation) + ")";
  return m;
}

struct ModelReport {
  bool n_increasing = true;
  bool log_width_increasing = true;
  std::optional<double> e_min, e_max, n_at_emax;
  double emin_extrapolation = 0.0;  ///< below the lowest level, in energy
  double emax_extrapolation = 0.0;  ///< above the highest level, in energy
  double data_span = 0.0;
  std::vector<std::string> warnings;

  bool ok() const { return n_increasing && log_width_increasing && e_min && e_max; }
};

/// Monotonicity of n(E) and ln(-E1(E)) on the data range, the E_min and
/// E_max estimates with their extrapolation distances, and the approximate
/// number of trapped states. Never throws for a well-formed model.
inline ModelReport validate_model(const SpectrumModel& m, const Tolerances& tol = {}) {
  ModelReport r;
  r.warnings = m.warnings;
  r.data_span = m.domain.width();
  constexpr int samples = 512;
  for (int i = 0; i <= samples; ++i) {
    const double e = m.domain.e_min + r.data_span * i / samples;
    if (!(m.dn_dE(e) > 0.0)) r.n_increasing = false;
    if (!(m.dlog_width_dE(e) > 0.0)) r.log_width_increasing = false;
  }
  if (!r.n_increasing) r.warnings.push_back("n(E) is not strictly increasing on the data range");
  if (!r.log_width_increasing)
    r.warnings.push_back("ln|E1(E)| is not strictly increasing: the barrier would be non-physical");
  try {
    r.e_min = estimate_emin(m, tol);
    r.emin_extrapolation = std::max(0.0, m.domain.e_min - *r.e_min);
    const WellWidth w = well_width(m, *r.e_min, tol);
    r.e_max = estimate_emax(m, w, 256, tol);
    r.emax_extrapolation = std::max(0.0, *r.e_max - m.domain.e_max);
    r.n_at_emax = m.n_of_E(*r.e_max);
  } catch (const Error& e) {
    r.warnings.push_back(e.what());
  }
  if (!m.analytic) {
    if (r.emin_extrapolation > 0.5 * r.data_span)
      r.warnings.push_back("E_min extrapolated more than 50% of the data span below the lowest level");
    if (r.emax_extrapolation > 0.5 * r.data_span)
      r.warnings.push_back("E_max extrapolated more than 50% of the data span above the highest level");
  }
  if (r.n_at_emax && *r.n_at_emax < 0.5) r.warnings.push_back("fewer than one trapped state");
  return r;
}

}  // namespace qss
