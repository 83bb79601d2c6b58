#include "sadyn/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sadyn {

using nlohmann::json;

const char* to_string(InitMode m) {
  switch (m) {
    case InitMode::Gaussian: return "gaussian";
    case InitMode::Orthogonal: return "orthogonal";
    case InitMode::ConstrainedSingle: return "constrained-single";
    case InitMode::ConstrainedMulti: return "constrained-multi";
  }
  return "unknown";
}

InitMode parse_init_mode(const std::string& s) {
  if (s == "gaussian") return InitMode::Gaussian;
  if (s == "orthogonal") return InitMode::Orthogonal;
  if (s == "constrained-single") return InitMode::ConstrainedSingle;
  if (s == "constrained-multi") return InitMode::ConstrainedMulti;
  throw Error(ErrorKind::ConfigError, "unknown init mode '" + s + "'");
}

const char* to_string(StateInit s) {
  return s == StateInit::Random ? "random" : "conditioning";
}

StateInit parse_state_init(const std::string& s) {
  if (s == "random") return StateInit::Random;
  if (s == "conditioning") return StateInit::Conditioning;
  throw Error(ErrorKind::ConfigError, "state.init: unknown value '" + s + "'");
}

RunConfig RunConfig::desk() { return RunConfig{}; }

RunConfig RunConfig::paper() {
  RunConfig c;
  c.dims = Dims{81, 512, 8, 64, 8};
  c.eta = 1.0;
  c.horizon = 16;
  return c;
}

RunConfig RunConfig::preset(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw Error(ErrorKind::ConfigError, "unknown preset '" + name + "'");
}

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::ConfigError, field + ": " + why);
}

}  // namespace

void RunConfig::validate() const {
  const auto& d = dims;
  if (d.tokens < 1) bad("dims.S", "must be >= 1");
  if (d.model_dim < 1) bad("dims.D", "must be >= 1");
  if (d.heads < 1) bad("dims.H", "must be >= 1");
  if (d.head_dim < 1) bad("dims.D_H", "must be >= 1");
  if (d.oscillator_dim < 1) bad("dims.N", "must be >= 1");
  switch (init.mode) {
    case InitMode::Gaussian:
    case InitMode::Orthogonal:
      if (d.heads * d.head_dim != d.model_dim) bad("dims", "H * D_H must equal D");
      if (init.mode == InitMode::Orthogonal && d.head_dim > d.model_dim)
        bad("dims.D_H", "orthogonal init needs D_H <= D");
      break;
    case InitMode::ConstrainedSingle:
      if (d.heads != 1) bad("dims.H", "constrained-single init needs H = 1");
      if (d.head_dim > d.model_dim) bad("dims.D_H", "must be <= D");
      break;
    case InitMode::ConstrainedMulti:
      if (d.model_dim % (2 * d.heads) != 0)
        throw Error(ErrorKind::DivisibilityError, "dims: 2H must divide D");
      break;
  }
  if (variant == Variant::AKOrN && d.model_dim % d.oscillator_dim != 0)
    throw Error(ErrorKind::DivisibilityError, "dims.N must divide D");
  if (!(eta > 0.0) || !std::isfinite(eta)) bad("eta", "must be positive and finite");
  if (!gamma.empty() && gamma.size() != 1 &&
      static_cast<Index>(gamma.size()) != d.model_dim)
    bad("gamma", "needs 1 or D entries");
  for (double g : gamma)
    if (!std::isfinite(g)) bad("gamma", "must be finite");
  if (beta && !(*beta > 0.0 && std::isfinite(*beta))) bad("beta", "must be positive");
  if (horizon < 1) bad("horizon_T", "must be >= 1");
  if (lyapunov_basis < 0 || lyapunov_basis > d.tokens * d.model_dim)
    bad("lyapunov.basis_dim", "must be in [0, S*D]");
  if (!(criticality_band > 0.0)) bad("lyapunov.band", "must be positive");
  if (samples < 1) bad("samples", "must be >= 1");
  if (iterations < 1) bad("simulate.iterations", "must be >= 1");
  if (!std::isfinite(init.std)) bad("init.std", "must be finite");
  if (!(init.omega_scale >= 0.0)) bad("init.omega_scale", "must be >= 0");
  if (!(state.conditioning_scale >= 0.0) || !std::isfinite(state.conditioning_scale))
    bad("state.conditioning_scale", "must be finite and >= 0");
  if (state.init == StateInit::Conditioning && state.conditioning_scale == 0.0)
    bad("state.init", "conditioning init needs state.conditioning_scale > 0");
  if (energy.system != "single" && energy.system != "multi")
    bad("energy.system", "must be 'single' or 'multi'");
  if (!(energy.dt > 0.0)) bad("energy.dt", "must be positive");
  if (energy.steps < 1) bad("energy.steps", "must be >= 1");
  if (energy.system == "multi" && d.model_dim % (2 * d.heads) != 0)
    throw Error(ErrorKind::DivisibilityError, "energy.system multi: 2H must divide D");
  for (Index s : bounds.sweep_tokens)
    if (s < 1) bad("bounds.sweep_tokens", "entries must be >= 1");
  if (bounds.sweep_model_dim < 1 || bounds.sweep_heads < 1 ||
      bounds.sweep_model_dim % bounds.sweep_heads != 0)
    throw Error(ErrorKind::DivisibilityError, "bounds.sweep_heads must divide bounds.sweep_model_dim");
  if (bounds.eta_grid.empty()) bad("bounds.eta_grid", "must not be empty");
  for (std::size_t k = 0; k < bounds.eta_grid.size(); ++k) {
    if (!(bounds.eta_grid[k] > 0.0)) bad("bounds.eta_grid", "entries must be positive");
    if (k > 0 && !(bounds.eta_grid[k] > bounds.eta_grid[k - 1]))
      bad("bounds.eta_grid", "must be ascending");
  }
  if (bounds.seeds < 1) bad("bounds.seeds", "must be >= 1");
  if (!(bounds.token_norm > 0.0)) bad("bounds.token_norm", "must be positive");
  for (double v : oscillator.eta_grid)
    if (!(v > 0.0)) bad("oscillator.eta_grid", "entries must be positive");
  for (double v : oscillator.omega_grid)
    if (!(v > 0.0)) bad("oscillator.omega_grid", "entries must be positive");
  if (oscillator.dim < 2 || oscillator.dim % 2 != 0)
    bad("oscillator.dim", "must be even and >= 2");
  if (out_dir.empty()) bad("output.dir", "must not be empty");
}

double RunConfig::effective_beta() const {
  return beta ? *beta : MSAWeights::default_beta(dims.head_dim);
}

double RunConfig::effective_std() const {
  return init.std > 0.0 ? init.std : 1.0 / std::sqrt(static_cast<double>(dims.model_dim));
}

NormParams RunConfig::norm_params() const {
  NormParams p = NormParams::unit(dims.model_dim);
  if (gamma.size() == 1) p.gamma.setConstant(gamma.front());
  else if (!gamma.empty())
    p.gamma = Eigen::Map<const Vector>(gamma.data(), static_cast<Index>(gamma.size()));
  return p;
}

StepConfig RunConfig::step_config() const {
  StepConfig s;
  s.eta = eta;
  s.norm = norm_params();
  s.variant = variant;
  s.oscillator_dim = dims.oscillator_dim;
  return s;
}

namespace {

template <typename T>
T get(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    bad(field, std::string("wrong type (") + e.what() + ")");
  }
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

Index get_index(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "must be an integer");
  return static_cast<Index>(j.get<long long>());
}

}  // namespace

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = base;
  if (doc.contains("preset")) c = RunConfig::preset(get<std::string>(doc["preset"], "preset"));

  check_keys(doc, "", {"preset", "seed", "dims", "variant", "eta", "gamma", "beta",
                       "horizon_T", "samples", "init", "state", "output", "simulate", "energy",
                       "lyapunov", "bounds", "oscillator"});
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
      bad("seed", "must be a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("dims")) {
    const json& d = doc["dims"];
    check_keys(d, "dims", {"S", "D", "H", "D_H", "N"});
    if (d.contains("S")) c.dims.tokens = get_index(d["S"], "dims.S");
    if (d.contains("D")) c.dims.model_dim = get_index(d["D"], "dims.D");
    if (d.contains("H")) c.dims.heads = get_index(d["H"], "dims.H");
    if (d.contains("D_H")) c.dims.head_dim = get_index(d["D_H"], "dims.D_H");
    if (d.contains("N")) c.dims.oscillator_dim = get_index(d["N"], "dims.N");
  }
  if (doc.contains("variant")) c.variant = parse_variant(get<std::string>(doc["variant"], "variant"));
  if (doc.contains("eta")) c.eta = get<double>(doc["eta"], "eta");
  if (doc.contains("gamma")) {
    const json& g = doc["gamma"];
    c.gamma = g.is_array() ? get<std::vector<double>>(g, "gamma")
                           : std::vector<double>{get<double>(g, "gamma")};
  }
  if (doc.contains("beta")) {
    if (doc["beta"].is_null()) c.beta.reset();
    else c.beta = get<double>(doc["beta"], "beta");
  }
  if (doc.contains("horizon_T")) c.horizon = get<int>(doc["horizon_T"], "horizon_T");
  if (doc.contains("samples")) c.samples = get<int>(doc["samples"], "samples");
  if (doc.contains("init")) {
    const json& i = doc["init"];
    check_keys(i, "init", {"mode", "std", "omega_scale"});
    if (i.contains("mode")) c.init.mode = parse_init_mode(get<std::string>(i["mode"], "init.mode"));
    if (i.contains("std")) c.init.std = get<double>(i["std"], "init.std");
    if (i.contains("omega_scale"))
      c.init.omega_scale = get<double>(i["omega_scale"], "init.omega_scale");
  }
  if (doc.contains("state")) {
    const json& st = doc["state"];
    check_keys(st, "state", {"init", "conditioning_scale"});
    if (st.contains("init")) c.state.init = parse_state_init(get<std::string>(st["init"], "state.init"));
    if (st.contains("conditioning_scale"))
      c.state.conditioning_scale = get<double>(st["conditioning_scale"], "state.conditioning_scale");
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    check_keys(o, "output", {"dir"});
    if (o.contains("dir")) c.out_dir = get<std::string>(o["dir"], "output.dir");
  }
  if (doc.contains("simulate")) {
    const json& s = doc["simulate"];
    check_keys(s, "simulate", {"iterations"});
    if (s.contains("iterations"))
      c.iterations = get<int>(s["iterations"], "simulate.iterations");
  }
  if (doc.contains("energy")) {
    const json& e = doc["energy"];
    check_keys(e, "energy", {"system", "dt", "steps", "integrator"});
    if (e.contains("system")) c.energy.system = get<std::string>(e["system"], "energy.system");
    if (e.contains("dt")) c.energy.dt = get<double>(e["dt"], "energy.dt");
    if (e.contains("steps")) c.energy.steps = get<int>(e["steps"], "energy.steps");
    if (e.contains("integrator"))
      c.energy.integrator = parse_integrator(get<std::string>(e["integrator"], "energy.integrator"));
  }
  if (doc.contains("lyapunov")) {
    const json& l = doc["lyapunov"];
    check_keys(l, "lyapunov", {"basis_dim", "band"});
    if (l.contains("basis_dim")) c.lyapunov_basis = get_index(l["basis_dim"], "lyapunov.basis_dim");
    if (l.contains("band")) c.criticality_band = get<double>(l["band"], "lyapunov.band");
  }
  if (doc.contains("bounds")) {
    const json& b = doc["bounds"];
    check_keys(b, "bounds", {"sweep_tokens", "sweep_model_dim", "sweep_heads", "eta_grid",
                             "seeds", "token_norm"});
    if (b.contains("sweep_model_dim"))
      c.bounds.sweep_model_dim = get_index(b["sweep_model_dim"], "bounds.sweep_model_dim");
    if (b.contains("sweep_heads"))
      c.bounds.sweep_heads = get_index(b["sweep_heads"], "bounds.sweep_heads");
    if (b.contains("sweep_tokens")) {
      c.bounds.sweep_tokens.clear();
      for (const auto& v : b["sweep_tokens"])
        c.bounds.sweep_tokens.push_back(get_index(v, "bounds.sweep_tokens"));
    }
    if (b.contains("eta_grid")) c.bounds.eta_grid = get<std::vector<double>>(b["eta_grid"], "bounds.eta_grid");
    if (b.contains("seeds")) c.bounds.seeds = get<int>(b["seeds"], "bounds.seeds");
    if (b.contains("token_norm")) c.bounds.token_norm = get<double>(b["token_norm"], "bounds.token_norm");
  }
  if (doc.contains("oscillator")) {
    const json& o = doc["oscillator"];
    check_keys(o, "oscillator", {"eta_grid", "omega_grid", "dim"});
    if (o.contains("eta_grid"))
      c.oscillator.eta_grid = get<std::vector<double>>(o["eta_grid"], "oscillator.eta_grid");
    if (o.contains("omega_grid"))
      c.oscillator.omega_grid = get<std::vector<double>>(o["omega_grid"], "oscillator.omega_grid");
    if (o.contains("dim")) c.oscillator.dim = get_index(o["dim"], "oscillator.dim");
  }
  return c;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["dims"] = {{"S", c.dims.tokens}, {"D", c.dims.model_dim}, {"H", c.dims.heads},
               {"D_H", c.dims.head_dim}, {"N", c.dims.oscillator_dim}};
  j["variant"] = to_string(c.variant);
  j["eta"] = c.eta;
  j["gamma"] = c.gamma;
  j["beta"] = c.effective_beta();
  j["horizon_T"] = c.horizon;
  j["samples"] = c.samples;
  j["init"] = {{"mode", to_string(c.init.mode)}, {"std", c.effective_std()},
               {"omega_scale", c.init.omega_scale}};
  j["state"] = {{"init", to_string(c.state.init)},
                {"conditioning_scale", c.state.conditioning_scale}};
  j["output"] = {{"dir", c.out_dir}};
  j["simulate"] = {{"iterations", c.iterations}};
  j["energy"] = {{"system", c.energy.system}, {"dt", c.energy.dt},
                 {"steps", c.energy.steps}, {"integrator", to_string(c.energy.integrator)}};
  j["lyapunov"] = {{"basis_dim", c.lyapunov_basis}, {"band", c.criticality_band}};
  j["bounds"] = {{"sweep_tokens", c.bounds.sweep_tokens},
                 {"sweep_model_dim", c.bounds.sweep_model_dim},
                 {"sweep_heads", c.bounds.sweep_heads}, {"eta_grid", c.bounds.eta_grid},
                 {"seeds", c.bounds.seeds}, {"token_norm", c.bounds.token_norm}};
  j["oscillator"] = {{"eta_grid", c.oscillator.eta_grid},
                     {"omega_grid", c.oscillator.omega_grid}, {"dim", c.oscillator.dim}};
  return j.dump(2) + "\n";
}

}  // namespace sadyn
