#include "sadyn/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "sadyn/init.hpp"
#include "sadyn/jacobian.hpp"

namespace sadyn {

double prop3_bound(double max_abs_gamma, double r_floor, double eta, double jmsa_norm) {
  if (!(r_floor > 0.0)) throw Error(ErrorKind::InvalidArgument, "r_floor must be positive");
  return (max_abs_gamma / r_floor) * (1.0 + eta * jmsa_norm);
}

double prop3_bound(const StepConfig& cfg, double r_floor, double jmsa_norm) {
  return prop3_bound(cfg.norm.max_abs_gamma(), r_floor, cfg.eta, jmsa_norm);
}

double castin_bound(const MSAWeights& w, double r, Index s) {
  if (!(r > 0.0) || s < 1)
    throw Error(ErrorKind::InvalidArgument, "castin bound needs r > 0 and S >= 1");
  w.validate();
  const double r4 = r * r * r * r;
  const double sd = static_cast<double>(s);
  double total = 0.0;
  for (Index h = 0; h < w.head_count(); ++h) {
    const auto& head = w.heads[static_cast<std::size_t>(h)];
    const double a = spectral_norm(w.beta * head.logit_matrix());
    total += std::sqrt(3.0) * spectral_norm(w.wo_block(h)) * spectral_norm(head.wv) *
             std::sqrt(a * r4 * (sd + 1.0) + sd);
  }
  return total;
}

BoundCheck check_bound(double measured, double bound, BoundContext ctx) {
  if (!std::isfinite(measured) || !std::isfinite(bound))
    throw Error(ErrorKind::InvalidArgument, "bound check needs finite values");
  BoundCheck c;
  c.lhs = measured;
  c.rhs = bound;
  c.slack = bound - measured;
  c.satisfied = c.slack >= -kBoundSlackTolerance;
  c.context = std::move(ctx);
  return c;
}

Prop3Measurement measure_prop3(const TokenMatrix& x, const MSAWeights& w,
                               const StepConfig& cfg) {
  const TokenMatrix y = itrsa_pre_norm(x, w, cfg);
  Prop3Measurement m;
  m.r_floor = y.rowwise().norm().minCoeff();
  m.r = x.rowwise().norm().maxCoeff();
  m.jmsa_norm = spectral_norm(jac_msa(x, w).data);
  m.step_norm = spectral_norm(jac_itrsa_step(x, w, cfg).data);
  m.bound_measured = prop3_bound(cfg, m.r_floor, m.jmsa_norm);
  m.bound_castin = prop3_bound(cfg, m.r_floor, castin_bound(w, m.r, x.rows()));
  return m;
}

EtaProbe eta_limit_probe(const TokenMatrix& x, const MSAWeights& w,
                         const StepConfig& cfg, const std::vector<double>& eta_grid) {
  const TokenMatrix delta = cfg.conditioning_or_zero(x.rows(), x.cols()) + msa(x, w);
  for (Index i = 0; i < delta.rows(); ++i)
    if (delta.row(i).norm() < cfg.norm.eps_floor)
      throw Error(ErrorKind::DegenerateRow, "update direction vanishes", i);

  EtaProbe probe;
  for (double eta : eta_grid) {
    StepConfig c = cfg;
    c.eta = eta;
    EtaProbeRow row;
    row.eta = eta;
    row.r_floor = itrsa_pre_norm(x, w, c).rowwise().norm().minCoeff();
    row.step_norm = spectral_norm(jac_itrsa_step(x, w, c).data);
    probe.sup_step_norm = std::max(probe.sup_step_norm, row.step_norm);
    probe.rows.push_back(row);
  }
  return probe;
}

std::vector<TokenSweepRow> token_sweep(const TokenSweepConfig& cfg) {
  if (cfg.token_counts.empty() || cfg.samples < 1)
    throw Error(ErrorKind::InvalidArgument, "token sweep needs token counts and samples");
  if (cfg.model_dim % cfg.heads != 0)
    throw Error(ErrorKind::DivisibilityError, "H must divide D");
  const Index d = cfg.model_dim;
  const Index dh = d / cfg.heads;
  const double std =
      cfg.weight_std > 0.0 ? cfg.weight_std : 1.0 / std::sqrt(static_cast<double>(d));

  Rng rng(cfg.seed);
  const MSAWeights w =
      gaussian_msa_weights(d, cfg.heads, dh, std, MSAWeights::default_beta(dh), rng);
  StepConfig step;
  step.eta = cfg.eta;
  step.norm = NormParams::unit(d);

  const Index max_tokens = *std::max_element(cfg.token_counts.begin(), cfg.token_counts.end());
  std::vector<TokenMatrix> pools;
  for (int k = 0; k < cfg.samples; ++k)
    pools.push_back(random_tokens(max_tokens, d, cfg.token_norm, rng));

  std::vector<TokenSweepRow> rows;
  for (Index s : cfg.token_counts) {
    TokenSweepRow row;
    row.tokens = s;
    for (const auto& pool : pools) {
      const TokenMatrix x = pool.topRows(s);
      const Prop3Measurement m = measure_prop3(x, w, step);
      row.msa_norm += m.jmsa_norm;
      row.step_norm += m.step_norm;
      row.prop3_bound += m.bound_measured;
      row.castin_bound += castin_bound(w, m.r, s);
    }
    const double n = static_cast<double>(cfg.samples);
    row.msa_norm /= n;
    row.step_norm /= n;
    row.prop3_bound /= n;
    row.castin_bound /= n;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sadyn
