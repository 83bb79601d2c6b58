#include "sadyn/report.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace sadyn {

using nlohmann::json;

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  require_shape(!header_.empty(), "CSV header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  require_shape(cells.size() == header_.size(), "CSV row width does not match header");
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(std::move(cells));
}

void CsvTable::add_footer(const std::string& key, const std::string& value) {
  footer_.emplace_back(key, value);
}

namespace {

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) out += ',';
    out += cells[k];
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& row : rows_) append_line(out, row);
  for (const auto& [k, v] : footer_) out += "# " + k + "," + v + "\n";
  return out;
}

std::string energy_csv(const EnergyReport& r) {
  CsvTable t({"t", "energy", "delta"});
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    t.add_row({format_double(r.times[k]), format_double(r.values[k]),
               k == 0 ? std::string() : format_double(r.deltas[k - 1])});
  }
  t.add_footer("monotone_fraction", format_double(r.monotone_fraction));
  t.add_footer("max_delta", format_double(r.max_delta));
  return t.str();
}

std::string energy_json(const EnergyReport& r) {
  json j;
  j["integrator"] = to_string(r.integrator);
  j["dt"] = r.dt;
  j["steps"] = r.deltas.size();
  j["monotone_fraction"] = r.monotone_fraction;
  j["max_delta"] = r.max_delta;
  j["values"] = r.values;
  j["deltas"] = r.deltas;
  return j.dump(2) + "\n";
}

std::string spectrum_csv(const LyapunovSpectrum& s) {
  CsvTable t({"rank", "exponent"});
  for (std::size_t k = 0; k < s.exponents.size(); ++k)
    t.add_row({std::to_string(k + 1), format_double(s.exponents[k])});
  return t.str();
}

std::string spectrum_json(const LyapunovSpectrum& s, double band) {
  const auto mm = max_mean_exponents(s);
  json j;
  j["horizon_T"] = s.horizon;
  j["basis_dim"] = s.basis_dim;
  j["reorthonormalize_every"] = s.reorthonormalize_every;
  j["log_base"] = "e";
  j["lambda_max"] = mm.max;
  j["lambda_mean"] = mm.mean;
  j["band"] = band;
  j["criticality"] = to_string(criticality_report(s, band));
  j["exponents"] = s.exponents;
  return j.dump(2) + "\n";
}

std::string regularizer_json(const RegularizerReport& r) {
  json j;
  j["r_e_multi"] = r.r_e_multi;
  j["r_e_single"] = r.r_e_single ? json(*r.r_e_single) : json(nullptr);
  j["r_spec"] = r.r_spec;
  j["orthogonality_deviation"] = r.orthogonality_deviation;
  json sig = json::object();
  for (const auto& [k, v] : r.per_matrix_sigmas) sig[k] = v;
  j["per_matrix_sigmas"] = std::move(sig);
  return j.dump(2) + "\n";
}

std::string token_sweep_csv(const std::vector<TokenSweepRow>& rows) {
  CsvTable t({"S", "msa_norm", "step_norm", "prop3_bound", "castin_bound"});
  for (const auto& r : rows)
    t.add_row({std::to_string(r.tokens), format_double(r.msa_norm),
               format_double(r.step_norm), format_double(r.prop3_bound),
               format_double(r.castin_bound)});
  return t.str();
}

std::string bound_checks_csv(const std::vector<BoundCheck>& checks) {
  CsvTable t({"label", "measured", "bound", "slack", "satisfied"});
  for (const auto& c : checks)
    t.add_row({c.context.label, format_double(c.lhs), format_double(c.rhs),
               format_double(c.slack), c.satisfied ? "1" : "0"});
  return t.str();
}

std::string eta_probe_csv(const EtaProbe& probe) {
  CsvTable t({"eta", "measured", "r_floor"});
  for (const auto& r : probe.rows) t.add_row(std::vector<double>{r.eta, r.step_norm, r.r_floor});
  t.add_footer("sup_measured", format_double(probe.sup_step_norm));
  return t.str();
}

std::string phase_scan_csv(const std::vector<PhaseCell>& cells) {
  CsvTable t({"eta", "omega", "max_abs_eig", "spectral_norm", "degenerate"});
  for (const auto& c : cells)
    t.add_row({format_double(c.eta), format_double(c.omega), format_double(c.max_abs_eig),
               format_double(c.spectral_norm), c.degenerate ? "1" : "0"});
  return t.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create directory for '" + path + "'");
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace sadyn
