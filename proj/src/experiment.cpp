#include "genewton/experiment.hpp"

#include "genewton/nlp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace genewton {

using nlohmann::json;

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kNewton: return "newton";
    case Algorithm::kQuasiNewton: return "quasi-newton";
    case Algorithm::kSqp: return "sqp";
    case Algorithm::kSqpBfgs: return "sqp-bfgs";
    case Algorithm::kSqpDfp: return "sqp-dfp";
    case Algorithm::kSeqConvex: return "seq-convex";
    case Algorithm::kPgd: return "pgd";
    case Algorithm::kAlm: return "alm";
    case Algorithm::kMultistep: return "multistep";
  }
  return "unknown";
}

std::vector<std::string> algorithm_names() {
  return {"newton", "quasi-newton", "sqp", "sqp-bfgs", "sqp-dfp",
          "seq-convex", "pgd", "alm", "multistep"};
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
  for (const std::string& n : algorithm_names()) {
    if (n == name) {
      if (n == "newton") return Algorithm::kNewton;
      if (n == "quasi-newton") return Algorithm::kQuasiNewton;
      if (n == "sqp") return Algorithm::kSqp;
      if (n == "sqp-bfgs") return Algorithm::kSqpBfgs;
      if (n == "sqp-dfp") return Algorithm::kSqpDfp;
      if (n == "seq-convex") return Algorithm::kSeqConvex;
      if (n == "pgd") return Algorithm::kPgd;
      if (n == "alm") return Algorithm::kAlm;
      if (n == "multistep") return Algorithm::kMultistep;
    }
  }
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) out.push_back(item);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_num(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + what + ": '" + s + "'");
  }
}

std::vector<double> parse_num_list(const std::string& s,
                                   const std::string& what) {
  std::vector<double> out;
  for (const std::string& tok : split(s, ',')) {
    const std::string t = trim(tok);
    if (!t.empty()) out.push_back(parse_num(t, what));
  }
  return out;
}

Vector parse_vector(const std::string& s, const std::string& what) {
  const std::vector<double> vals = parse_num_list(s, what);
  Vector v(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
  return v;
}

Matrix parse_matrix(const std::string& s, const std::string& what) {
  // Rows separated by ';', entries by ','.
  const std::vector<std::string> rows = split(s, ';');
  Matrix m;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vector row = parse_vector(rows[r], what);
    if (r == 0) m.resize(static_cast<int>(rows.size()), row.size());
    if (row.size() != m.cols()) throw ConfigError("ragged matrix for " + what);
    m.row(static_cast<int>(r)) = row;
  }
  return m;
}

}  // namespace

DisturbanceSpec DisturbanceSpec::parse(const std::string& text) {
  DisturbanceSpec spec;
  const std::vector<std::string> parts = split(text, ':');
  const std::string kind = parts.empty() ? "" : trim(parts[0]);
  if (kind == "zero" || kind.empty()) {
    spec.kind = DisturbanceSequence::Kind::kZero;
    return spec;
  }
  if (kind == "constant") {
    if (parts.size() != 2) throw ConfigError("constant disturbance needs a value");
    spec.kind = DisturbanceSequence::Kind::kConstant;
    spec.delta = parse_num(parts[1], "disturbance value");
    return spec;
  }
  if (kind == "decaying") {
    if (parts.size() < 2 || parts.size() > 3) {
      throw ConfigError("decaying disturbance: decaying:C[:RATE]");
    }
    spec.kind = DisturbanceSequence::Kind::kDecaying;
    spec.delta = parse_num(parts[1], "disturbance value");
    if (parts.size() == 3) spec.rate = parse_num(parts[2], "decay rate");
    return spec;
  }
  if (kind == "random") {
    if (parts.size() < 2 || parts.size() > 3) {
      throw ConfigError("random disturbance: random:DELTA[:seed=N]");
    }
    spec.kind = DisturbanceSequence::Kind::kRandomBounded;
    spec.delta = parse_num(parts[1], "disturbance bound");
    if (parts.size() == 3) {
      std::string s = trim(parts[2]);
      if (s.rfind("seed=", 0) == 0) s = s.substr(5);
      spec.seed = static_cast<std::uint64_t>(parse_num(s, "seed"));
    }
    return spec;
  }
  throw ConfigError("unknown disturbance kind '" + kind +
                    "' (zero, constant, decaying, random)");
}

std::string DisturbanceSpec::str() const {
  switch (kind) {
    case DisturbanceSequence::Kind::kZero: return "zero";
    case DisturbanceSequence::Kind::kConstant:
      return "constant:" + format_double(delta);
    case DisturbanceSequence::Kind::kDecaying:
      return "decaying:" + format_double(delta) + ":" + format_double(rate);
    case DisturbanceSequence::Kind::kRandomBounded:
      return "random:" + format_double(delta) +
             ":seed=" + std::to_string(seed);
    case DisturbanceSequence::Kind::kCustom: return "custom";
  }
  return "zero";
}

DisturbanceSequence DisturbanceSpec::make(int dim) const {
  switch (kind) {
    case DisturbanceSequence::Kind::kZero:
      return DisturbanceSequence::zero(dim);
    case DisturbanceSequence::Kind::kConstant:
      return DisturbanceSequence::constant(delta, dim);
    case DisturbanceSequence::Kind::kDecaying:
      return DisturbanceSequence::decaying(delta, rate, dim);
    case DisturbanceSequence::Kind::kRandomBounded:
      return DisturbanceSequence::random_bounded(delta, dim, seed);
    case DisturbanceSequence::Kind::kCustom:
      throw ConfigError("custom disturbances are not file-configurable");
  }
  return DisturbanceSequence::zero(dim);
}

void apply_config_line(ExperimentConfig& cfg, const std::string& raw_key,
                       const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  auto inline_spec = [&]() -> InlineNlpSpec& {
    if (!cfg.inline_problem) cfg.inline_problem.emplace();
    return *cfg.inline_problem;
  };

  if (key == "problem") {
    cfg.problem = value;
  } else if (key == "algorithm") {
    const auto a = parse_algorithm(value);
    if (!a) {
      std::string names;
      for (const auto& n : algorithm_names()) names += n + " ";
      throw ConfigError("unknown algorithm '" + value + "'; valid: " + names);
    }
    cfg.algorithm = *a;
  } else if (key == "disturbance") {
    cfg.disturbance = DisturbanceSpec::parse(value);
  } else if (key == "channel") {
    const auto c = parse_channel(value);
    if (!c) throw ConfigError("unknown channel '" + value + "' (f, g, grad_h, gradient)");
    cfg.channel = *c;
  } else if (key == "tol") {
    cfg.tol = parse_num(value, key);
  } else if (key == "max_iter") {
    cfg.max_iter = static_cast<int>(parse_num(value, key));
  } else if (key == "subproblem_tol") {
    cfg.subproblem_tol = parse_num(value, key);
  } else if (key == "oracle") {
    cfg.enable_oracle = value == "1" || value == "true" || value == "on";
  } else if (key == "rho") {
    cfg.rho = parse_num(value, key);
  } else if (key == "alpha") {
    cfg.pgd_alpha = parse_num(value, key);
  } else if (key == "alm_tol") {
    cfg.alm_tol = parse_num(value, key);
  } else if (key == "inner") {
    if (value == "exact") {
      cfg.inner = InnerMode::exact();
    } else if (value.rfind("steps:", 0) == 0) {
      cfg.inner = InnerMode::steps(static_cast<int>(parse_num(value.substr(6), key)));
    } else if (value.rfind("noise:", 0) == 0) {
      cfg.inner = InnerMode::noise(parse_num(value.substr(6), key));
    } else {
      throw ConfigError("inner mode: exact | steps:N | noise:SIGMA");
    }
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "label") {
    cfg.label = value;
  } else if (key == "rho_grid") {
    cfg.rho_grid = parse_num_list(value, key);
  } else if (key == "delta_grid") {
    cfg.delta_grid = parse_num_list(value, key);
  } else if (key == "seeds") {
    for (double s : parse_num_list(value, key)) {
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else if (key == "workers") {
    cfg.workers = std::max(1, static_cast<int>(parse_num(value, key)));
  } else if (key == "inline.dim") {
    inline_spec().dim = static_cast<int>(parse_num(value, key));
  } else if (key == "inline.objective") {
    if (value == "quadratic") {
      inline_spec().objective = InlineNlpSpec::Objective::kQuadratic;
    } else if (value == "rosenbrock") {
      inline_spec().objective = InlineNlpSpec::Objective::kRosenbrock;
    } else {
      throw ConfigError("inline.objective: quadratic | rosenbrock");
    }
  } else if (key == "inline.q") {
    inline_spec().q = parse_matrix(value, key);
  } else if (key == "inline.q_diag") {
    inline_spec().q = Matrix(parse_vector(value, key).asDiagonal());
  } else if (key == "inline.c") {
    inline_spec().c = parse_vector(value, key);
  } else if (key == "inline.constraint") {
    if (value == "none") inline_spec().constraint = InlineNlpSpec::Constraint::kNone;
    else if (value == "linear") inline_spec().constraint = InlineNlpSpec::Constraint::kLinear;
    else if (value == "circle") inline_spec().constraint = InlineNlpSpec::Constraint::kCircle;
    else throw ConfigError("inline.constraint: none | linear | circle");
  } else if (key == "inline.a") {
    inline_spec().a = parse_matrix(value, key);
  } else if (key == "inline.b") {
    inline_spec().b = parse_vector(value, key);
  } else if (key == "inline.radius_sq") {
    inline_spec().circle_radius_sq = parse_num(value, key);
  } else if (key == "inline.lower") {
    inline_spec().lower = parse_vector(value, key);
  } else if (key == "inline.upper") {
    inline_spec().upper = parse_vector(value, key);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    apply_config_line(cfg, t.substr(0, eq), t.substr(eq + 1));
  }
  return cfg;
}

namespace {

struct ProblemBundle {
  bool is_nlp = false;
  std::optional<NlpProblem> nlp;
  GeneralizedEquation geneq;
  Vector start;
};

ProblemBundle resolve_problem(const ExperimentConfig& cfg,
                              DisturbanceChannel channel) {
  ProblemBundle bundle;
  if (cfg.problem == "inline") {
    if (!cfg.inline_problem) {
      throw ConfigError("problem = inline requires inline.* keys");
    }
    InlineNlpSpec spec = *cfg.inline_problem;
    spec.channel = channel;
    bundle.is_nlp = true;
    bundle.nlp = build_inline_nlp(spec);
    bundle.geneq = make_kkt_geneq(*bundle.nlp);
    bundle.start = Vector::Zero(bundle.nlp->dim_x + bundle.nlp->dim_g);
    return bundle;
  }
  const ProblemDefinition* def = find_problem(cfg.problem);
  if (!def) {
    std::string names;
    for (const auto& p : problem_registry()) names += p.name + " ";
    throw ConfigError("unknown problem '" + cfg.problem + "'; valid: " + names +
                      "inline");
  }
  bundle.is_nlp = def->is_nlp;
  if (def->is_nlp) bundle.nlp = def->make_nlp(channel);
  bundle.geneq = def->make_geneq(channel);
  bundle.start = def->start;
  return bundle;
}

double limsup_tail(const std::vector<double>& errors) {
  const std::size_t n = errors.size();
  const std::size_t start = n - std::max<std::size_t>(1, n / 4);
  double m = 0.0;
  for (std::size_t k = start; k < n; ++k) m = std::max(m, errors[k]);
  return m;
}

json run_summary(const RunResult& res, const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = 1;
  j["problem"] = cfg.problem;
  j["algorithm"] = to_string(cfg.algorithm);
  j["channel"] = to_string(cfg.channel);
  j["disturbance"] = {{"spec", cfg.disturbance.str()},
                      {"sup_norm", cfg.disturbance.delta},
                      {"seed", cfg.disturbance.seed}};
  j["config"] = {{"tol", cfg.tol},
                 {"max_iter", cfg.max_iter},
                 {"subproblem_tol", cfg.subproblem_tol},
                 {"rho", cfg.rho},
                 {"pgd_alpha", cfg.pgd_alpha},
                 {"oracle", cfg.enable_oracle}};
  j["iterations"] = res.iterations;
  j["wall_seconds"] = res.wall_seconds;
  j["converged"] = res.converged;
  j["status"] = res.status;
  j["final_residual"] = res.final_residual;
  j["final_error_to_zbar"] =
      res.final_error ? json(*res.final_error) : json(nullptr);
  j["limsup_error"] = res.limsup_error ? json(*res.limsup_error) : json(nullptr);
  if (res.iss) {
    j["iss"] = {{"alpha", res.iss->alpha},
                {"gamma", res.iss->gamma},
                {"feasible", res.iss->feasible},
                {"asymptotic_gain",
                 res.iss->feasible ? json(res.iss->asymptotic_gain())
                                   : json(nullptr)}};
  } else {
    j["iss"] = nullptr;
  }
  if (res.quadratic) {
    j["quadratic"] = {{"c", res.quadratic->c},
                      {"steps_used", res.quadratic->steps_used},
                      {"not_quadratic", res.quadratic->not_quadratic}};
  } else {
    j["quadratic"] = nullptr;
  }
  if (res.regularity) {
    j["kappa"] = {{"value", res.regularity->kappa},
                  {"pattern_inverse_max", res.regularity->pattern_inverse_max()},
                  {"sampled_radius", res.regularity->sampled_radii}};
  } else {
    j["kappa"] = nullptr;
  }
  j["rate_fit"] = res.rate_fit ? json(*res.rate_fit) : json(nullptr);

  json checks = json::array();
  auto add_check = [&checks](const std::string& name, bool pass, double value) {
    checks.push_back({{"name", name}, {"pass", pass}, {"value", value}});
  };
  if (res.iss && res.iss->feasible && res.trace.has_errors()) {
    // Geometric-sum closure of the fitted per-step bound:
    // e_k <= alpha^k e_0 + gamma ||v||_inf / (1 - alpha).
    const auto& e = res.trace.errors_to_zbar;
    double sup = 0.0;
    for (const auto& v : res.trace.disturbances) sup = std::max(sup, v.norm());
    const double tail = res.iss->gamma * sup / (1.0 - res.iss->alpha);
    bool ok = true;
    double worst = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      const double bound =
          std::pow(res.iss->alpha, static_cast<double>(k)) * e[0] + tail;
      worst = std::max(worst, e[k] - bound);
      if (e[k] > bound * (1.0 + 1e-9) + 1e-15) ok = false;
    }
    add_check("iss_geometric_certificate", ok, worst);
    if (sup > 0.0 && res.limsup_error) {
      const double bound = res.iss->asymptotic_gain() * sup * 1.1;
      add_check("ball_containment", *res.limsup_error <= bound,
                *res.limsup_error);
    }
  }
  j["checks"] = checks;
  return j;
}

}  // namespace

double fit_linear_rate(const std::vector<double>& errors, double floor) {
  // Only the contracting transient carries rate information; steps bouncing
  // at the asymptotic floor (set by noise or inner tolerances) are excluded.
  double tail = 0.0;
  const std::size_t n = errors.size();
  for (std::size_t k = n - std::max<std::size_t>(1, n / 4); k < n; ++k) {
    tail = std::max(tail, errors[k]);
  }
  const double cutoff = std::max(floor, 2.0 * tail);

  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (errors[k] > cutoff && errors[k + 1] > 0.0) {
      ratios.push_back(errors[k + 1] / errors[k]);
    }
  }
  if (ratios.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::sort(ratios.begin(), ratios.end());
  const std::size_t mid = ratios.size() / 2;
  return ratios.size() % 2 == 1
             ? ratios[mid]
             : 0.5 * (ratios[mid - 1] + ratios[mid]);
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const auto run_start = std::chrono::steady_clock::now();
  DisturbanceChannel channel = cfg.channel;
  if (cfg.algorithm == Algorithm::kQuasiNewton) {
    channel = DisturbanceChannel::kGradientH;
  }
  ProblemBundle bundle = resolve_problem(cfg, channel);

  NewtonConfig ncfg;
  ncfg.tol = cfg.tol;
  ncfg.max_iter = cfg.max_iter;
  ncfg.subproblem_tol = cfg.subproblem_tol;
  ncfg.enable_oracle = cfg.enable_oracle;

  RunResult res;
  const GeneralizedEquation& ge = bundle.geneq;

  switch (cfg.algorithm) {
    case Algorithm::kNewton:
    case Algorithm::kQuasiNewton:
    case Algorithm::kSeqConvex:
    case Algorithm::kPgd: {
      Linearization lin = Linearization::exact_gradient();
      int dist_dim = ge.dim_v;
      if (cfg.algorithm == Algorithm::kQuasiNewton) {
        lin = Linearization::gradient_plus_noise();
        dist_dim = ge.dim_z * ge.dim_z;
      } else if (cfg.algorithm == Algorithm::kSeqConvex) {
        lin = bundle.is_nlp ? convexification_linearization(*bundle.nlp)
                            : Linearization::zero_hessian();
        // degenerate subproblems are expected; report them via the oracle
        ncfg.enable_oracle = true;
      } else if (cfg.algorithm == Algorithm::kPgd) {
        lin = Linearization::scaled_identity(cfg.pgd_alpha);
      }
      res.trace = run_newton(ge, lin, bundle.start,
                             cfg.disturbance.make(dist_dim), ncfg);
      break;
    }
    case Algorithm::kSqp:
    case Algorithm::kSqpBfgs:
    case Algorithm::kSqpDfp: {
      if (!bundle.is_nlp) {
        throw ConfigError("algorithm " + std::string(to_string(cfg.algorithm)) +
                          " needs an NLP problem");
      }
      SqpConfig scfg;
      scfg.newton = ncfg;
      scfg.exact_hessian = cfg.algorithm == Algorithm::kSqp;
      scfg.family = cfg.algorithm == Algorithm::kSqpDfp
                        ? HessianApprox::Family::kDfp
                        : HessianApprox::Family::kBfgs;
      const NlpProblem& nlp = *bundle.nlp;
      res.trace = run_sqp(nlp, bundle.start.head(nlp.dim_x),
                          bundle.start.tail(nlp.dim_g),
                          cfg.disturbance.make(nlp.dim_v), scfg);
      break;
    }
    case Algorithm::kAlm:
    case Algorithm::kMultistep: {
      if (!bundle.is_nlp) {
        throw ConfigError("algorithm " + std::string(to_string(cfg.algorithm)) +
                          " needs an NLP problem");
      }
      AlmConfig acfg;
      acfg.rho = cfg.rho;
      acfg.inner = cfg.inner;
      acfg.max_outer = cfg.max_iter;
      acfg.tol = cfg.alm_tol;
      acfg.newton = ncfg;
      const NlpProblem& nlp = *bundle.nlp;
      res.trace = run_alm(nlp, bundle.start.head(nlp.dim_x),
                          bundle.start.tail(nlp.dim_g),
                          cfg.disturbance.make(nlp.dim_v), acfg);
      break;
    }
  }

  const Trace& trace = res.trace;
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    run_start)
          .count();
  res.iterations = trace.steps();
  res.final_residual = trace.residuals.back();
  const double stop_tol =
      cfg.algorithm == Algorithm::kAlm || cfg.algorithm == Algorithm::kMultistep
          ? cfg.alm_tol
          : cfg.tol;
  res.converged = res.final_residual <= stop_tol;
  res.solver_failed = !trace.completed_ok() ||
                      (!res.converged && cfg.disturbance.delta == 0.0);
  res.status = trace.completed_ok() ? (res.converged ? "converged" : "running")
                                    : to_string(trace.final_status());

  if (trace.has_errors()) {
    res.final_error = trace.errors_to_zbar.back();
    res.limsup_error = limsup_tail(trace.errors_to_zbar);
    if (ge.zbar) {
      try {
        res.iss = estimate_iss_gains(trace, *ge.zbar);
      } catch (const SolverError&) {
      }
      try {
        res.quadratic = fit_quadratic_rate(trace, *ge.zbar);
      } catch (const SolverError&) {
      }
      try {
        const Matrix m = ge.jac(*ge.zbar, Vector::Zero(ge.dim_v));
        MixedAvi lin(ge.eval_nominal(*ge.zbar) - m * *ge.zbar, m, ge.cone);
        res.regularity = estimate_kappa(lin, *ge.zbar, 1e-4, 25, 0);
      } catch (const std::exception&) {
      }
    }
    const auto it = trace.extras.find("y_error");
    res.rate_fit = fit_linear_rate(it != trace.extras.end()
                                       ? it->second
                                       : trace.errors_to_zbar);
    if (std::isnan(*res.rate_fit)) res.rate_fit.reset();
  }

  res.summary_json = run_summary(res, cfg).dump(2);
  return res;
}

std::string trace_to_csv(const Trace& trace) {
  std::ostringstream out;
  const int nz = trace.iterates.empty() ? 0 : static_cast<int>(trace.iterates[0].size());
  const int nv = trace.disturbances.empty()
                     ? 0
                     : static_cast<int>(trace.disturbances[0].size());
  out << "k";
  for (int i = 0; i < nz; ++i) out << ",z" << i;
  for (int i = 0; i < nv; ++i) out << ",v" << i;
  out << ",residual,error_to_zbar\n";
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    out << k;
    for (int i = 0; i < nz; ++i) {
      out << ',' << format_double(trace.iterates[k][i]);
    }
    for (int i = 0; i < nv; ++i) {
      out << ',';
      if (k < trace.disturbances.size()) {
        out << format_double(trace.disturbances[k][i]);
      }
    }
    out << ',' << format_double(trace.residuals[k]) << ',';
    if (trace.has_errors()) out << format_double(trace.errors_to_zbar[k]);
    out << '\n';
  }
  return out.str();
}

namespace {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

std::string run_label(const ExperimentConfig& cfg) {
  if (!cfg.label.empty()) return cfg.label;
  return cfg.problem + "_" + to_string(cfg.algorithm);
}

}  // namespace

std::string write_run_outputs(const RunResult& result,
                              const ExperimentConfig& cfg,
                              const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string label = run_label(cfg);
  const std::string csv_path = (fs::path(dir) / (label + "_trace.csv")).string();
  write_atomic(csv_path, trace_to_csv(result.trace));
  write_atomic((fs::path(dir) / (label + "_summary.json")).string(),
               result.summary_json + "\n");
  return csv_path;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  std::vector<double> rhos = cfg.rho_grid;
  std::vector<double> deltas = cfg.delta_grid;
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (rhos.empty()) rhos.push_back(cfg.rho);
  if (deltas.empty()) deltas.push_back(cfg.disturbance.delta);
  if (seeds.empty()) seeds.push_back(cfg.disturbance.seed);
  if (cfg.rho_grid.empty() && cfg.delta_grid.empty() && cfg.seeds.empty()) {
    throw ConfigError("sweep: no axes configured (rho_grid, delta_grid, seeds)");
  }

  struct Job {
    ExperimentConfig cfg;
    double rho, delta;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double rho : rhos) {
    for (double delta : deltas) {
      for (std::uint64_t seed : seeds) {
        ExperimentConfig c = cfg;
        c.rho = rho;
        c.disturbance.delta = delta;
        c.disturbance.seed = seed;
        if (delta > 0.0 &&
            c.disturbance.kind == DisturbanceSequence::Kind::kZero) {
          c.disturbance.kind = DisturbanceSequence::Kind::kRandomBounded;
        }
        if (delta == 0.0) c.disturbance.kind = DisturbanceSequence::Kind::kZero;
        c.out_dir.clear();
        jobs.push_back({std::move(c), rho, delta, seed});
      }
    }
  }

  std::vector<std::vector<std::string>> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      std::vector<std::string> row{
          job.cfg.problem, to_string(job.cfg.algorithm), format_double(job.rho),
          format_double(job.delta), std::to_string(job.seed)};
      try {
        const RunResult r = run_experiment(job.cfg);
        row.push_back(r.status);
        row.push_back(std::to_string(r.iterations));
        row.push_back(r.converged ? "1" : "0");
        row.push_back(format_double(r.final_residual));
        row.push_back(r.final_error ? format_double(*r.final_error) : "");
        row.push_back(r.limsup_error ? format_double(*r.limsup_error) : "");
        row.push_back(r.iss ? format_double(r.iss->alpha) : "");
        row.push_back(r.iss ? format_double(r.iss->gamma) : "");
        row.push_back(r.iss && r.iss->feasible ? "1" : "0");
        row.push_back(r.rate_fit ? format_double(*r.rate_fit) : "");
        row.push_back(r.quadratic ? format_double(r.quadratic->c) : "");
      } catch (const std::exception& err) {
        row.push_back(std::string("error: ") + err.what());
        while (row.size() < 16) row.push_back("");
      }
      rows[i] = std::move(row);
    }
  };

  const int nworkers = std::max(1, std::min<int>(cfg.workers,
                                                 static_cast<int>(jobs.size())));
  if (nworkers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult sweep;
  sweep.header = {"problem",      "algorithm",  "rho",
                  "delta",        "seed",       "status",
                  "iterations",   "converged",  "final_residual",
                  "final_error",  "limsup_error", "alpha_hat",
                  "gamma_hat",    "iss_feasible", "rate_fit",
                  "quad_c"};
  sweep.rows = std::move(rows);

  std::ostringstream csv;
  for (std::size_t i = 0; i < sweep.header.size(); ++i) {
    csv << (i ? "," : "") << sweep.header[i];
  }
  csv << '\n';
  for (const auto& row : sweep.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << row[i];
    csv << '\n';
  }
  sweep.csv = csv.str();
  return sweep;
}

std::string write_sweep_csv(const SweepResult& sweep,
                            const ExperimentConfig& cfg,
                            const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string path =
      (fs::path(dir) / (run_label(cfg) + "_sweep.csv")).string();
  write_atomic(path, sweep.csv);
  return path;
}

std::string probe_to_json(const std::string& problem,
                          const SolutionMapProbe& probe,
                          const ProbeOptions& opts) {
  json j;
  j["schema_version"] = 1;
  j["problem"] = problem;
  j["radius"] = opts.radius;
  j["samples"] = opts.samples;
  j["slack"] = opts.slack;
  j["lip_p1"] = probe.lip_p1;
  j["lip_p2"] = probe.lip_p2;
  j["kappa_hat"] = probe.kappa_hat;
  j["mu_hat"] = probe.mu_hat;
  j["omega"] = std::isfinite(probe.omega) ? json(probe.omega) : json(nullptr);
  j["ratio_p1"] = probe.ratio_p1;
  j["ratio_p2"] = probe.ratio_p2;
  j["bound_ok"] = probe.bound_ok;
  j["solver_failures"] = probe.solver_failures;
  return j.dump(2);
}

}  // namespace genewton
