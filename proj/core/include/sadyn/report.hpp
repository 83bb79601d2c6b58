#pragma once

// CSV and JSON emission for the result types. CSV output always has a
// header, uses '.' as decimal separator and '\n' line endings; doubles are
// printed with 17 significant digits independent of the global locale.

#include <string>
#include <vector>

#include "sadyn/bounds.hpp"
#include "sadyn/energy.hpp"
#include "sadyn/lyapunov.hpp"
#include "sadyn/oscillator.hpp"
#include "sadyn/regularizers.hpp"

namespace sadyn {

std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);
  /// Lines written after the table as "# key,value".
  void add_footer(const std::string& key, const std::string& value);

  std::size_t row_count() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::pair<std::string, std::string>> footer_;
};

/// Columns t, energy, delta; the first row has an empty delta. The footer
/// carries monotone_fraction and max_delta.
std::string energy_csv(const EnergyReport& r);
std::string energy_json(const EnergyReport& r);

/// Columns rank, exponent.
std::string spectrum_csv(const LyapunovSpectrum& s);
std::string spectrum_json(const LyapunovSpectrum& s, double band);

std::string regularizer_json(const RegularizerReport& r);

/// Columns S, msa_norm, step_norm, prop3_bound, castin_bound.
std::string token_sweep_csv(const std::vector<TokenSweepRow>& rows);
/// Columns label, measured, bound, slack, satisfied.
std::string bound_checks_csv(const std::vector<BoundCheck>& checks);
/// Columns eta, measured, r_floor.
std::string eta_probe_csv(const EtaProbe& probe);
/// Columns eta, omega, max_abs_eig, spectral_norm, degenerate.
std::string phase_scan_csv(const std::vector<PhaseCell>& cells);

/// Creates parent directories as needed. Raises IoError on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sadyn
