#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "parallel.hpp"
#include "sadyn/archive.hpp"
#include "sadyn/bounds.hpp"
#include "sadyn/config.hpp"
#include "sadyn/energy.hpp"
#include "sadyn/init.hpp"
#include "sadyn/jacobian.hpp"
#include "sadyn/lyapunov.hpp"
#include "sadyn/oscillator.hpp"
#include "sadyn/regularizers.hpp"
#include "sadyn/report.hpp"

namespace sadyn::cli {
namespace {

constexpr std::array<const char*, 7> kSubcommands{
    "simulate", "jacobian-check", "lyapunov", "energy", "bounds", "oscillator", "regularize"};

constexpr double kJacobianCheckTolerance = 1e-5;

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> preset;
};

struct SubcommandFlags {
  // energy
  std::optional<std::string> system;
  std::optional<int> steps;
  std::optional<double> dt;
  std::optional<std::string> integrator;
  // bounds
  std::optional<std::string> sweep_tokens;
  // oscillator
  std::string osc_variant = "both";
  // simulate / lyapunov
  std::optional<int> iterations;
  std::optional<int> horizon;
  std::optional<int> samples;
};

std::string usage() {
  std::ostringstream s;
  s << "usage: sadyn <subcommand> [--config PATH] [--seed U64] [--out DIR] "
       "[--preset desk|paper] [flags]\n\nsubcommands:\n";
  for (const char* c : kSubcommands) s << "  " << c << "\n";
  s << "\nRun 'sadyn <subcommand> --help' for subcommand flags.\n";
  return s.str();
}

/// Independent generator for stream k of a run; depends only on (seed, k).
Rng stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

std::vector<Index> parse_token_list(const std::string& spec) {
  std::vector<Index> out;
  const auto colon = spec.find(':');
  try {
    if (colon != std::string::npos) {
      // lo:hi doubles from lo until hi.
      const long lo = std::stol(spec.substr(0, colon));
      const long hi = std::stol(spec.substr(colon + 1));
      if (lo < 1 || hi < lo) throw Error(ErrorKind::ConfigError, "--sweep-tokens: need 1 <= lo <= hi");
      for (long s = lo; s <= hi; s *= 2) out.push_back(s);
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stol(item));
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::ConfigError, "--sweep-tokens: expected lo:hi or a comma list");
  }
  return out;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void require_discrete(const RunConfig& cfg, const char* command) {
  if (cfg.variant == Variant::ContinuousProjected)
    throw Error(ErrorKind::ConfigError,
                std::string("variant: ") + command + " needs a discrete variant (ItrSA or AKOrN)");
}

StepConfig step_config_for(const RunConfig& cfg, const InitialState& st) {
  StepConfig sc = cfg.step_config();
  sc.conditioning = st.conditioning;
  return sc;
}

TokenMatrix step(const TokenMatrix& x, const InitializedModel& m, const StepConfig& sc) {
  return sc.variant == Variant::AKOrN ? akorn_step(x, m.weights, *m.bank, sc)
                                      : itrsa_step(x, m.weights, sc);
}

void save_model(const RunConfig& cfg, const InitializedModel& m) {
  save_archive(join(cfg.out_dir, "weights.archive"), WeightArchive{cfg.seed, m.weights, m.bank});
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  require_discrete(cfg, "simulate");
  const InitializedModel model = init_weights(cfg);
  Rng rng = stream_rng(cfg.seed, 1);
  const InitialState st = initial_state(cfg, rng);
  const StepConfig sc = step_config_for(cfg, st);

  CsvTable traj({"t", "pseudo_energy", "update_norm", "r_floor"});
  TokenMatrix x = st.x0;
  for (int t = 0; t <= cfg.iterations; ++t) {
    const TokenMatrix y = sc.conditioning_or_zero(x.rows(), x.cols()) + msa(x, model.weights);
    const TokenMatrix pre = x + sc.eta * y;
    const double r_floor = pre.rowwise().norm().minCoeff();
    if (t == cfg.iterations) {
      traj.add_row({format_double(t), format_double(pseudo_energy(x, y)), "", format_double(r_floor)});
      break;
    }
    const TokenMatrix next = step(x, model, sc);
    traj.add_row(std::vector<double>{static_cast<double>(t), pseudo_energy(x, y), (next - x).norm(),
                                     r_floor});
    x = next;
  }
  std::vector<std::string> header{"token"};
  for (Index k = 0; k < x.cols(); ++k) header.push_back("x" + std::to_string(k));
  CsvTable state(header);
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (Index k = 0; k < x.cols(); ++k) row.push_back(format_double(x(i, k)));
    state.add_row(std::move(row));
  }
  write_text_file(join(cfg.out_dir, "trajectory.csv"), traj.str());
  write_text_file(join(cfg.out_dir, "final_state.csv"), state.str());
  save_model(cfg, model);
  out << "simulated " << cfg.iterations << " " << to_string(cfg.variant) << " iterations; wrote "
      << join(cfg.out_dir, "trajectory.csv") << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_jacobian_check(const RunConfig& cfg, std::ostream& out) {
  require_discrete(cfg, "jacobian-check");
  const InitializedModel model = init_weights(cfg);
  const MSAWeights& w = model.weights;
  Rng rng = stream_rng(cfg.seed, 1);
  const InitialState st = initial_state(cfg, rng);
  const StepConfig sc = step_config_for(cfg, st);
  const TokenMatrix& x = st.x0;
  const Index n = cfg.dims.oscillator_dim;
  const bool osc = cfg.variant == Variant::AKOrN;
  const TokenMatrix pre =
      osc ? akorn_pre_norm(x, w, *model.bank, sc) : itrsa_pre_norm(x, w, sc);

  struct Check {
    std::string name;
    JacobianMatrix analytic;
    StateMap f;
    TokenMatrix at;
  };
  std::vector<Check> checks;
  if (osc) {
    checks.push_back({"pi_osc", jac_pi_osc(pre, n),
                      [n](const TokenMatrix& z) { return pi_normalize_osc(z, n); }, pre});
  } else {
    checks.push_back({"pi", jac_pi(pre), [](const TokenMatrix& z) { return pi_normalize(z); }, pre});
    checks.push_back({"rmsnorm", jac_rmsnorm(pre, sc.norm),
                      [&](const TokenMatrix& z) { return rmsnorm(z, sc.norm); }, pre});
  }
  for (Index h = 0; h < w.head_count(); ++h) {
    const HeadWeights& hw = w.heads[static_cast<std::size_t>(h)];
    checks.push_back({"sa_head[" + std::to_string(h) + "]", jac_sa_head(x, hw, w.beta),
                      [&hw, &w](const TokenMatrix& z) { return sa_head(z, hw, w.beta); }, x});
  }
  checks.push_back({"msa", jac_msa(x, w), [&w](const TokenMatrix& z) { return msa(z, w); }, x});
  if (osc) {
    checks.push_back({"akorn_step", jac_akorn_step(x, w, *model.bank, sc),
                      [&](const TokenMatrix& z) {
                        return pi_normalize_osc(akorn_pre_norm(z, w, *model.bank, sc), n);
                      },
                      x});
  } else {
    checks.push_back({"itrsa_step", jac_itrsa_step(x, w, sc),
                      [&](const TokenMatrix& z) { return itrsa_step(z, w, sc); }, x});
  }

  std::vector<std::vector<std::string>> rows(checks.size());
  std::vector<char> passed(checks.size(), 0);
  parallel_for(checks.size(), [&](std::size_t k) {
    const Check& c = checks[k];
    const Matrix fd = fd_jacobian(c.f, c.at).data;
    const Matrix& a = c.analytic.data;
    double err = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j)
        err = std::max(err, std::abs(a(i, j) - fd(i, j)) / std::max(1.0, std::abs(fd(i, j))));
    passed[k] = err <= kJacobianCheckTolerance;
    rows[k] = {c.name, format_double(err), format_double(spectral_norm(a)),
               passed[k] ? "true" : "false"};
  });
  CsvTable table({"operator", "max_rel_error", "spectral_norm", "passed"});
  for (auto& r : rows) table.add_row(std::move(r));
  table.add_footer("tolerance", format_double(kJacobianCheckTolerance));

  const SpectralSummary spec = eig_spectrum(checks.back().analytic);
  CsvTable eig({"re", "im", "abs"});
  for (const auto& l : spec.eigenvalues) eig.add_row(std::vector<double>{l.real(), l.imag(), std::abs(l)});
  eig.add_footer("spectral_norm", format_double(spec.spectral_norm));
  eig.add_footer("max_abs_eig", format_double(spec.max_abs_eig));

  write_text_file(join(cfg.out_dir, "jacobian_check.csv"), table.str());
  write_text_file(join(cfg.out_dir, "step_eigenvalues.csv"), eig.str());
  save_model(cfg, model);
  const auto failed = std::count(passed.begin(), passed.end(), 0);
  out << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size()
      << " Jacobians match finite differences (tol " << kJacobianCheckTolerance << ")\n";
  return failed == 0 ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------------------

int cmd_lyapunov(const RunConfig& cfg, std::ostream& out) {
  require_discrete(cfg, "lyapunov");
  const InitializedModel model = init_weights(cfg);
  const auto count = static_cast<std::size_t>(cfg.samples);
  std::vector<LyapunovSpectrum> spectra(count);
  parallel_for(count, [&](std::size_t k) {
    Rng rng = stream_rng(cfg.seed, 1 + k);
    const InitialState st = initial_state(cfg, rng);
    const StepConfig sc = step_config_for(cfg, st);
    const TangentMap map = cfg.variant == Variant::AKOrN
                               ? TangentMap::akorn(model.weights, *model.bank, sc, cfg.dims.tokens)
                               : TangentMap::itrsa(model.weights, sc, cfg.dims.tokens);
    spectra[k] = lyapunov_spectrum(map, vec(st.x0), cfg.horizon, cfg.lyapunov_basis);
  });

  // Rank-wise mean over samples.
  LyapunovSpectrum mean = spectra.front();
  for (std::size_t k = 1; k < count; ++k)
    for (std::size_t i = 0; i < mean.exponents.size(); ++i)
      mean.exponents[i] += spectra[k].exponents[i];
  for (double& e : mean.exponents) e /= static_cast<double>(count);

  CsvTable per_sample({"sample", "lambda_max", "lambda_mean", "criticality"});
  for (std::size_t k = 0; k < count; ++k) {
    const auto mm = max_mean_exponents(spectra[k]);
    per_sample.add_row({std::to_string(k), format_double(mm.max), format_double(mm.mean),
                        to_string(criticality_report(spectra[k], cfg.criticality_band))});
  }
  CsvTable full({"sample", "rank", "exponent"});
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t i = 0; i < spectra[k].exponents.size(); ++i)
      full.add_row({std::to_string(k), std::to_string(i), format_double(spectra[k].exponents[i])});
  write_text_file(join(cfg.out_dir, "spectrum.csv"), spectrum_csv(mean));
  write_text_file(join(cfg.out_dir, "spectrum_samples.csv"), full.str());
  write_text_file(join(cfg.out_dir, "spectrum.json"), spectrum_json(mean, cfg.criticality_band));
  write_text_file(join(cfg.out_dir, "lyapunov_samples.csv"), per_sample.str());
  save_model(cfg, model);

  const auto mm = max_mean_exponents(mean);
  out << "lambda_max " << format_double(mm.max) << "\n"
      << "lambda_mean " << format_double(mm.mean) << "\n"
      << "criticality " << to_string(criticality_report(mean, cfg.criticality_band)) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_energy(const RunConfig& cfg, std::ostream& out) {
  const Dims& d = cfg.dims;
  const double beta = cfg.effective_beta();
  Rng rng(cfg.seed);
  FlowSystem sys;
  MSAWeights archived;
  archived.beta = beta;
  if (cfg.energy.system == "single") {
    const Matrix wq = gaussian_matrix(d.model_dim, d.head_dim, cfg.effective_std(), rng);
    const Matrix wk = gaussian_matrix(d.model_dim, d.head_dim, cfg.effective_std(), rng);
    sys = FlowSystem::constrained_single(wq, wk, beta);
    archived.heads = sys.heads;
    archived.wo = Matrix::Identity(d.model_dim, d.model_dim);
  } else {
    std::uniform_int_distribution<std::uint64_t> u;
    const OrthoHeadSet set = make_orthogonal_heads(d.model_dim, d.heads, u(rng));
    sys = FlowSystem::constrained_multi(set, beta);
    archived.heads = sys.heads;
    archived.wo = Matrix::Zero(d.heads * d.model_dim, d.model_dim);
    for (Index h = 0; h < d.heads; ++h)
      archived.wo.middleRows(h * d.model_dim, d.model_dim).setIdentity();
  }
  Rng state_rng = stream_rng(cfg.seed, 1);
  const TokenMatrix x0 = random_unit_tokens(d.tokens, d.model_dim, state_rng);
  const EnergyReport r = verify_descent(x0, sys, cfg.energy.dt, cfg.energy.steps, cfg.energy.integrator);

  write_text_file(join(cfg.out_dir, "energy.csv"), energy_csv(r));
  write_text_file(join(cfg.out_dir, "energy.json"), energy_json(r));
  save_archive(join(cfg.out_dir, "weights.archive"), WeightArchive{cfg.seed, archived, {}});
  out << cfg.energy.system << "-head flow, " << cfg.energy.steps << " "
      << to_string(cfg.energy.integrator) << " steps: monotone_fraction "
      << format_double(r.monotone_fraction) << ", max_delta " << format_double(r.max_delta) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
  require_discrete(cfg, "bounds");
  if (cfg.variant == Variant::AKOrN)
    throw Error(ErrorKind::ConfigError, "variant: bounds applies to ItrSA");
  const InitializedModel model = init_weights(cfg);
  const MSAWeights& w = model.weights;
  const std::size_t seeds = static_cast<std::size_t>(cfg.bounds.seeds);
  const std::size_t etas = cfg.bounds.eta_grid.size();

  // One slot per (seed, eta) Prop-3 check plus one Lipschitz check per seed.
  std::vector<BoundCheck> prop3(seeds * etas);
  std::vector<BoundCheck> lipschitz(seeds);
  parallel_for(seeds, [&](std::size_t k) {
    Rng rng = stream_rng(cfg.seed, 1 + k);
    std::uniform_real_distribution<double> scale(0.05, 1.0);
    TokenMatrix x = random_tokens(cfg.dims.tokens, cfg.dims.model_dim, 1.0, rng);
    for (Index i = 0; i < x.rows(); ++i) x.row(i) *= cfg.bounds.token_norm * scale(rng);
    for (std::size_t e = 0; e < etas; ++e) {
      StepConfig sc = cfg.step_config();
      sc.eta = cfg.bounds.eta_grid[e];
      const Prop3Measurement m = measure_prop3(x, w, sc);
      BoundContext ctx{"prop3 seed=" + std::to_string(k) + " eta=" + format_double(sc.eta),
                       m.r_floor, sc.eta, sc.norm.gamma.cwiseAbs().maxCoeff(), m.r,
                       cfg.dims.tokens, m.jmsa_norm};
      prop3[k * etas + e] = check_bound(m.step_norm, m.bound_measured, ctx);
    }
    const double r = x.rowwise().norm().maxCoeff();
    const double jmsa = spectral_norm(jac_msa(x, w).data);
    lipschitz[k] = check_bound(jmsa, castin_bound(w, r, cfg.dims.tokens),
                               BoundContext{"msa_lipschitz seed=" + std::to_string(k), 0.0, 0.0, 0.0,
                                            r, cfg.dims.tokens, jmsa});
  });
  std::vector<BoundCheck> all = prop3;
  all.insert(all.end(), lipschitz.begin(), lipschitz.end());
  write_text_file(join(cfg.out_dir, "bound_checks.csv"), bound_checks_csv(all));

  Rng probe_rng = stream_rng(cfg.seed, 0);
  const TokenMatrix xp = random_tokens(cfg.dims.tokens, cfg.dims.model_dim, cfg.bounds.token_norm, probe_rng);
  write_text_file(join(cfg.out_dir, "eta_probe.csv"),
                  eta_probe_csv(eta_limit_probe(xp, w, cfg.step_config(), cfg.bounds.eta_grid)));

  if (!cfg.bounds.sweep_tokens.empty()) {
    TokenSweepConfig sweep;
    sweep.token_counts = cfg.bounds.sweep_tokens;
    sweep.model_dim = cfg.bounds.sweep_model_dim;
    sweep.heads = cfg.bounds.sweep_heads;
    sweep.weight_std = cfg.init.std;
    sweep.token_norm = cfg.bounds.token_norm;
    sweep.eta = cfg.eta;
    sweep.samples = cfg.samples;
    sweep.seed = cfg.seed;
    write_text_file(join(cfg.out_dir, "token_sweep.csv"), token_sweep_csv(token_sweep(sweep)));
  }
  save_model(cfg, model);

  const auto summarize = [&](const char* label, const std::vector<BoundCheck>& v) {
    double min_slack = std::numeric_limits<double>::infinity();
    std::size_t ok = 0;
    for (const auto& c : v) {
      min_slack = std::min(min_slack, c.slack);
      ok += c.satisfied ? 1 : 0;
    }
    out << label << ": " << ok << "/" << v.size() << " satisfied, min slack "
        << format_double(min_slack) << "\n";
  };
  summarize("normalized step bound", prop3);
  summarize("msa lipschitz bound", lipschitz);
  return kExitOk;
}

// ---------------------------------------------------------------------------

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int k = 0; k < 20; ++k) g.push_back(0.05 + k * (5.0 - 0.05) / 19.0);
  return g;
}

int cmd_oscillator(const RunConfig& cfg, const std::string& which, std::ostream& out) {
  std::vector<OscVariant> variants;
  if (which == "both") variants = {OscVariant::DiscretePlain, OscVariant::DiscreteNormalized};
  else variants = {parse_osc_variant(which)};
  const std::vector<double> etas = cfg.oscillator.eta_grid.empty() ? default_grid() : cfg.oscillator.eta_grid;
  const std::vector<double> omegas =
      cfg.oscillator.omega_grid.empty() ? default_grid() : cfg.oscillator.omega_grid;
  for (OscVariant v : variants) {
    const std::vector<PhaseCell> cells = phase_scan(etas, omegas, v, cfg.oscillator.dim);
    double max_eig = 0.0, max_norm = 0.0;
    for (const auto& c : cells) {
      max_eig = std::max(max_eig, c.max_abs_eig);
      max_norm = std::max(max_norm, c.spectral_norm);
    }
    const std::string name = std::string("phase_scan_") + to_string(v) + ".csv";
    write_text_file(join(cfg.out_dir, name), phase_scan_csv(cells));
    out << to_string(v) << ": max |lambda| " << format_double(max_eig) << ", max ||J||_2 "
        << format_double(max_norm) << " over " << cells.size() << " cells\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_regularize(const RunConfig& cfg, std::ostream& out) {
  const InitializedModel model = init_weights(cfg);
  const RegularizerReport r = regularizer_report(model.weights);
  write_text_file(join(cfg.out_dir, "regularizers.json"), regularizer_json(r));
  save_model(cfg, model);
  out << "r_e_multi " << format_double(r.r_e_multi) << "\n";
  if (r.r_e_single) out << "r_e_single " << format_double(*r.r_e_single) << "\n";
  out << "r_spec " << format_double(r.r_spec) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ShapeError:
    case ErrorKind::DivisibilityError:
    case ErrorKind::HeadCountError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::ConfigError:
    case ErrorKind::IoError:
    case ErrorKind::NotOnSphere:
      return kExitValidation;
    default:
      return kExitNumerical;
  }
}

RunConfig resolve_config(const CommonFlags& f, const std::string& command,
                         const SubcommandFlags& s) {
  RunConfig cfg = f.preset ? RunConfig::preset(*f.preset) : RunConfig::desk();
  if (f.config) cfg = load_config(*f.config, cfg);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out_dir = *f.out;
  if (command == "energy") {
    if (s.system) cfg.energy.system = *s.system;
    if (s.steps) cfg.energy.steps = *s.steps;
    if (s.dt) cfg.energy.dt = *s.dt;
    if (s.integrator) cfg.energy.integrator = parse_integrator(*s.integrator);
  }
  if (s.sweep_tokens) cfg.bounds.sweep_tokens = parse_token_list(*s.sweep_tokens);
  if (s.iterations) cfg.iterations = *s.iterations;
  if (s.horizon) cfg.horizon = *s.horizon;
  if (s.samples) cfg.samples = *s.samples;
  cfg.validate();
  return cfg;
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args.front() == "--help" || args.front() == "-h") {
    (args.empty() ? err : out) << usage();
    return args.empty() ? kExitUsage : kExitOk;
  }
  const std::string command = args.front();
  if (std::find(kSubcommands.begin(), kSubcommands.end(), command) == kSubcommands.end()) {
    err << "sadyn: unknown subcommand '" << command << "'\n\n" << usage();
    return kExitUsage;
  }

  CLI::App app("sadyn " + command, "sadyn " + command);
  CommonFlags common;
  SubcommandFlags sub;
  app.add_option("--config", common.config, "JSON run configuration");
  app.add_option("--seed", common.seed, "Seed for every random draw");
  app.add_option("--out", common.out, "Output directory");
  app.add_option("--preset", common.preset, "Base configuration")
      ->check(CLI::IsMember({"desk", "paper"}));
  if (command == "energy") {
    app.add_option("--system", sub.system, "single or multi")->check(CLI::IsMember({"single", "multi"}));
    app.add_option("--steps", sub.steps, "Integrator steps");
    app.add_option("--dt", sub.dt, "Integrator step size");
    app.add_option("--integrator", sub.integrator, "rk4 or euler");
  } else if (command == "bounds") {
    app.add_option("--sweep-tokens", sub.sweep_tokens,
                   "Token counts for the sweep: lo:hi (doubling) or a comma list");
    app.add_option("--samples", sub.samples, "Samples per token count");
  } else if (command == "oscillator") {
    app.add_option("--variant", sub.osc_variant, "plain, normalized or both")
        ->check(CLI::IsMember({"plain", "normalized", "both"}));
  } else if (command == "simulate") {
    app.add_option("--iterations", sub.iterations, "Loop iterations");
  } else if (command == "lyapunov") {
    app.add_option("--horizon", sub.horizon, "Horizon T");
    app.add_option("--samples", sub.samples, "Number of random initial states");
  }

  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());  // CLI11 consumes a reversed vector
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "sadyn " << command << ": " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    const RunConfig cfg = resolve_config(common, command, sub);
    write_text_file(join(cfg.out_dir, "config.json"), config_to_json(cfg));
    if (command == "simulate") return cmd_simulate(cfg, out);
    if (command == "jacobian-check") return cmd_jacobian_check(cfg, out);
    if (command == "lyapunov") return cmd_lyapunov(cfg, out);
    if (command == "energy") return cmd_energy(cfg, out);
    if (command == "bounds") return cmd_bounds(cfg, out);
    if (command == "oscillator") return cmd_oscillator(cfg, sub.osc_variant, out);
    return cmd_regularize(cfg, out);
  } catch (const Error& e) {
    err << "sadyn " << command << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "sadyn " << command << ": " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace sadyn::cli
