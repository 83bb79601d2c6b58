#pragma once

// Upper bounds on the step and MSA Jacobian norms, and probes that compare
// them with measured spectral norms.

#include <cstdint>
#include <string>
#include <vector>

#include "sadyn/attention.hpp"

namespace sadyn {

/// A bound counts as satisfied when slack = rhs - lhs >= -kBoundSlackTolerance.
inline constexpr double kBoundSlackTolerance = 1e-8;

struct BoundContext {
  std::string label;
  double r_floor = 0.0;   // min row norm of the pre-normalization state
  double eta = 0.0;
  double max_abs_gamma = 0.0;
  double r = 0.0;         // max row norm of X
  Index tokens = 0;
  double jmsa_norm = 0.0;
};

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool satisfied = false;
  BoundContext context;
};

/// (max|gamma| / R) (1 + eta ||J_MSA||).
double prop3_bound(double max_abs_gamma, double r_floor, double eta, double jmsa_norm);
double prop3_bound(const StepConfig& cfg, double r_floor, double jmsa_norm);

/// sum_h sqrt(3) ||W^O_h|| ||W^V_h|| sqrt(||beta W^Q_h W^K_h^T|| r^4 (S+1) + S)
/// with W^O_h the rows of W^O that head h feeds.
double castin_bound(const MSAWeights& w, double r, Index s);

BoundCheck check_bound(double measured, double bound, BoundContext ctx = {});

/// Everything needed to check the normalization bound at one ItrSA state.
struct Prop3Measurement {
  double r_floor = 0.0;
  double r = 0.0;
  double jmsa_norm = 0.0;
  double step_norm = 0.0;
  double bound_measured = 0.0;  // uses the measured ||J_MSA||
  double bound_castin = 0.0;    // castin_bound substituted for ||J_MSA||
};

Prop3Measurement measure_prop3(const TokenMatrix& x, const MSAWeights& w,
                               const StepConfig& cfg);

struct EtaProbeRow {
  double eta = 0.0;
  double step_norm = 0.0;
  double r_floor = 0.0;
};

struct EtaProbe {
  std::vector<EtaProbeRow> rows;
  double sup_step_norm = 0.0;
};

/// Measured ||J_step|| of the ItrSA update at x for each eta. Raises
/// DegenerateRow when a row of C + MSA(X) vanishes.
EtaProbe eta_limit_probe(const TokenMatrix& x, const MSAWeights& w,
                         const StepConfig& cfg, const std::vector<double>& eta_grid);

struct TokenSweepConfig {
  std::vector<Index> token_counts{8, 16, 32, 64, 128, 256};
  Index model_dim = 8;
  Index heads = 2;
  /// Entry std of the random weights; <= 0 selects 1/sqrt(D).
  double weight_std = 0.0;
  /// Row norm of the random tokens.
  double token_norm = 10.0;
  double eta = 1.0;
  int samples = 3;
  std::uint64_t seed = 0;
};

struct TokenSweepRow {
  Index tokens = 0;
  double msa_norm = 0.0;
  double step_norm = 0.0;
  double prop3_bound = 0.0;
  double castin_bound = 0.0;
};

/// Fixed random weights (gamma = 1); for every sample, one pool of
/// max(token_counts) random tokens whose first S rows form the S-token
/// state. Norms are averaged over samples.
std::vector<TokenSweepRow> token_sweep(const TokenSweepConfig& cfg);

}  // namespace sadyn
