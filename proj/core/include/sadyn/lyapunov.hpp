#pragma once

// Finite-horizon Lyapunov spectra by QR re-orthonormalization of a tangent
// basis carried along a trajectory. Exponents are per step, natural log.

#include <functional>
#include <vector>

#include "sadyn/attention.hpp"

namespace sadyn {

/// A discrete map on flat state vectors together with its Jacobian.
struct TangentMap {
  std::function<Vector(const Vector&)> step;
  std::function<Matrix(const Vector&)> jacobian;

  static TangentMap linear(const Matrix& m);
  /// ItrSA on S x D token states, vectorized token-major.
  static TangentMap itrsa(const MSAWeights& w, const StepConfig& cfg, Index tokens);
  static TangentMap akorn(const MSAWeights& w, const OmegaBank& bank,
                          const StepConfig& cfg, Index tokens);
};

struct LyapunovSpectrum {
  std::vector<double> exponents;  // sorted descending
  int horizon = 0;
  Index basis_dim = 0;
  int reorthonormalize_every = 1;
};

inline constexpr int kDefaultHorizon = 16;
inline constexpr double kDefaultCriticalityBand = 0.1;

/// basis_dim <= 0 tracks the full spectrum.
LyapunovSpectrum lyapunov_spectrum(const TangentMap& map, const Vector& x0,
                                   int horizon = kDefaultHorizon,
                                   Index basis_dim = 0);

struct ExponentSummary {
  double max = 0.0;
  double mean = 0.0;
};

ExponentSummary max_mean_exponents(const LyapunovSpectrum& s);

enum class Criticality { Subcritical, Critical, Supercritical };

const char* to_string(Criticality c);

Criticality criticality_report(const LyapunovSpectrum& s,
                               double band = kDefaultCriticalityBand);

}  // namespace sadyn
