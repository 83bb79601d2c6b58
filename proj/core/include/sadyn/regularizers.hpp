#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sadyn/attention.hpp"

namespace sadyn {

struct RegularizerReport {
  double r_e_multi = 0.0;
  /// Only defined for single-head weights.
  std::optional<double> r_e_single;
  double r_spec = 0.0;
  /// Spectral norm of every matrix entering r_spec, keyed "wq[0]", ..., "wo".
  std::map<std::string, double> per_matrix_sigmas;
  /// max |W^T W - I| over W^V (concatenated) and W^O. Zero for orthogonal
  /// weights; reported, never enforced.
  double orthogonality_deviation = 0.0;
};

/// || W^V W^O - (W^V W^O)^T ||_F^2 with W^V = [W^V_1, ..., W^V_H].
double r_e_multi(const MSAWeights& w);
/// Same quantity restricted to H = 1; HeadCountError otherwise.
double r_e_single(const MSAWeights& w);

/// sum_W (sigma(W)^2 - 1)^2 over an explicit list of matrices plus
/// sum_b ||b||^4.
double r_spec(const std::vector<Matrix>& matrices, const std::vector<Vector>& biases);
/// r_spec over {W^Q_h, W^K_h, W^V_h for all h, W^O}.
double r_spec(const MSAWeights& w, const std::vector<Vector>& biases = {});

/// Central-difference gradient of a scalar regularizer with respect to every
/// weight matrix, keyed like per_matrix_sigmas. Training is out of scope;
/// this is a diagnostic for downstream optimizers.
std::map<std::string, Matrix> regularizer_fd_gradient(
    const MSAWeights& w, const std::function<double(const MSAWeights&)>& regularizer,
    double h = 1e-6);

RegularizerReport regularizer_report(const MSAWeights& w,
                                     const std::vector<Vector>& biases = {});

}  // namespace sadyn
