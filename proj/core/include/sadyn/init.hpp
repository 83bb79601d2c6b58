#pragma once

// Deterministic random weights and states. Every draw comes from a
// std::mt19937_64 seeded by the caller, so equal seeds give bitwise equal
// results.

#include <cstdint>
#include <optional>
#include <random>

#include "sadyn/attention.hpp"
#include "sadyn/config.hpp"

namespace sadyn {

using Rng = std::mt19937_64;

Matrix gaussian_matrix(Index rows, Index cols, double std, Rng& rng);
/// Orthonormal columns when rows >= cols, orthonormal rows otherwise.
Matrix random_orthogonal(Index rows, Index cols, Rng& rng);

/// H heads of width D_H with N(0, std^2) entries and a D x D output.
MSAWeights gaussian_msa_weights(Index d, Index h, Index dh, double std, double beta,
                                Rng& rng);

/// Antisymmetric generators (G - G^T)/2 with G of N(0, scale^2) entries.
OmegaBank random_omega_bank(Index d, Index n, double scale, Rng& rng);

/// Gaussian rows rescaled to the given norm.
TokenMatrix random_tokens(Index s, Index d, double row_norm, Rng& rng);
TokenMatrix random_unit_tokens(Index s, Index d, Rng& rng);
/// Every N-dimensional oscillator of every row has unit norm.
TokenMatrix random_unit_oscillators(Index s, Index d, Index n, Rng& rng);

struct InitializedModel {
  MSAWeights weights;
  std::optional<OmegaBank> bank;  // present for the AKOrN variant
};

/// Validates cfg, then draws weights from Rng(cfg.seed).
///   gaussian            entries N(0, std^2)
///   orthogonal          every projection has singular values 1
///   constrained-single  H = 1, W^V = (W^K W^Q^T + W^Q W^K^T)/2, W^O = I
///   constrained-multi   orthogonal head set, W^V_h = (A_h + A_h^T)/2 and
///                       W^O stacking H identities, so MSA = sum_h SA_h
InitializedModel init_weights(const RunConfig& cfg);

struct InitialState {
  TokenMatrix x0;
  /// Empty when state.conditioning_scale is 0.
  TokenMatrix conditioning;
};

/// Draws C and X(0) following cfg.state. Continues the caller's stream, so a
/// fixed sequence of calls on Rng(cfg.seed) is reproducible.
InitialState initial_state(const RunConfig& cfg, Rng& rng);

}  // namespace sadyn
