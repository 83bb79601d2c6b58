#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sadyn/attention.hpp"
#include "sadyn/energy.hpp"

namespace sadyn {

enum class InitMode { Gaussian, Orthogonal, ConstrainedSingle, ConstrainedMulti };

const char* to_string(InitMode m);
InitMode parse_init_mode(const std::string& s);

struct Dims {
  Index tokens = 8;          // S
  Index model_dim = 32;      // D
  Index heads = 4;           // H
  Index head_dim = 8;        // D_H
  Index oscillator_dim = 4;  // N
};

struct InitSpec {
  InitMode mode = InitMode::Gaussian;
  /// Entry std for gaussian weights; <= 0 selects 1/sqrt(D).
  double std = 0.0;
  /// Entry std of the Omega generators before antisymmetrization.
  double omega_scale = 1.0;
};

/// How the looped state X(0) is drawn.
///   random        unit tokens (ItrSA) or unit oscillators (AKOrN)
///   conditioning  X(0) = normalized copy of C; needs a nonzero C
enum class StateInit { Random, Conditioning };

const char* to_string(StateInit s);
StateInit parse_state_init(const std::string& s);

struct StateSettings {
  StateInit init = StateInit::Random;
  /// Row norm of the random conditioning input C; 0 gives C = 0.
  double conditioning_scale = 0.0;
};

struct EnergySettings {
  std::string system = "single";  // single | multi
  double dt = 1e-3;
  int steps = 2000;
  Integrator integrator = Integrator::RK4;
};

struct BoundSettings {
  std::vector<Index> sweep_tokens;  // empty: no token sweep
  /// The token sweep draws its own weights at this size; S*D reaches 2048
  /// at S = 256 and D = 8, where the model dims would be too costly.
  Index sweep_model_dim = 8;
  Index sweep_heads = 2;
  std::vector<double> eta_grid{0.1, 1.0, 10.0};
  int seeds = 100;
  double token_norm = 10.0;
};

struct OscillatorSettings {
  std::vector<double> eta_grid;    // empty: 20 values in [0.05, 5]
  std::vector<double> omega_grid;  // empty: 20 values in [0.05, 5]
  Index dim = 2;
};

struct RunConfig {
  std::uint64_t seed = 0;
  Dims dims;
  Variant variant = Variant::ItrSA;
  double eta = 1.0;
  /// Empty: all ones. One value: constant. D values: per feature.
  std::vector<double> gamma;
  /// Unset: 1/sqrt(D_H).
  std::optional<double> beta;
  int horizon = 16;
  Index lyapunov_basis = 0;  // 0: full spectrum
  double criticality_band = 0.1;
  int samples = 1;
  int iterations = 16;       // simulate
  InitSpec init;
  StateSettings state;
  std::string out_dir = "out";
  EnergySettings energy;
  BoundSettings bounds;
  OscillatorSettings oscillator;

  static RunConfig desk();
  /// D = 512, H = 8, eta = 1 with an 81-token state.
  static RunConfig paper();
  static RunConfig preset(const std::string& name);

  /// ConfigError naming the first offending field.
  void validate() const;

  double effective_beta() const;
  double effective_std() const;
  NormParams norm_params() const;
  StepConfig step_config() const;
};

/// Reads a JSON document on top of `base`; fields absent from the document
/// keep their base values. Raises ConfigError on unknown keys or bad types.
RunConfig parse_config(const std::string& json_text, const RunConfig& base);
RunConfig load_config(const std::string& path, const RunConfig& base);
std::string config_to_json(const RunConfig& cfg);

}  // namespace sadyn
