#include "genewton/isslab.hpp"

#include "genewton/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace genewton {

namespace {

std::vector<double> errors_from_trace(const Trace& trace, const Vector& zbar) {
  std::vector<double> e;
  e.reserve(trace.iterates.size());
  for (const Vector& z : trace.iterates) e.push_back((z - zbar).norm());
  return e;
}

}  // namespace

IssEstimate estimate_iss_gains(const std::vector<double>& errors,
                               const std::vector<double>& vnorms) {
  if (errors.size() < 3 || vnorms.size() + 1 != errors.size()) {
    throw SolverError(SolverError::Code::kInsufficientData,
                      "estimate_iss_gains: need >= 3 iterates");
  }
  const int steps = static_cast<int>(vnorms.size());

  struct Candidate {
    double alpha, gamma;
  };
  std::vector<Candidate> feasible;
  IssEstimate::Witness best_witness{};
  bool have_witness = false;

  for (int ia = 1; ia <= 99; ++ia) {
    const double alpha = ia / 100.0;
    double gamma = 0.0;
    bool ok = true;
    for (int k = 0; k < steps; ++k) {
      const double lhs = errors[k + 1];
      const double rhs_free = alpha * errors[k];
      if (vnorms[k] > 0.0) {
        gamma = std::max(gamma, (lhs - rhs_free) / vnorms[k]);
      } else if (lhs > rhs_free * (1.0 + 1e-12)) {
        ok = false;
        if (!have_witness || ia == 99) {
          best_witness = {k, lhs, rhs_free};
          have_witness = true;
        }
        break;
      }
    }
    if (ok) feasible.push_back({alpha, std::max(gamma, 0.0)});
  }

  IssEstimate est;
  if (feasible.empty()) {
    est.feasible = false;
    est.alpha = 0.99;
    est.gamma = kInf;
    if (have_witness) est.violation_witness = best_witness;
    return est;
  }

  double gmin = kInf;
  for (const Candidate& c : feasible) gmin = std::min(gmin, c.gamma);
  // Smallest alpha among near-minimal gammas (floating-point ties).
  const double cutoff = gmin * (1.0 + 1e-9) + 1e-300;
  for (const Candidate& c : feasible) {
    if (c.gamma <= cutoff) {
      est.alpha = c.alpha;
      est.gamma = c.gamma;
      est.feasible = true;
      break;
    }
  }
  return est;
}

IssEstimate estimate_iss_gains(const Trace& trace, const Vector& zbar,
                               int first_step) {
  std::vector<double> e = errors_from_trace(trace, zbar);
  std::vector<double> v = trace.disturbance_norms();
  if (first_step > 0 && first_step < static_cast<int>(v.size())) {
    e.erase(e.begin(), e.begin() + first_step);
    v.erase(v.begin(), v.begin() + first_step);
  }
  return estimate_iss_gains(e, v);
}

QuadraticRateFit fit_quadratic_rate(const Trace& trace, const Vector& zbar,
                                    double e_lo, double e_hi,
                                    double kappa_hat) {
  require(e_lo > 0.0 && e_hi > e_lo, "fit_quadratic_rate: bad window");
  const std::vector<double> e = errors_from_trace(trace, zbar);
  const std::vector<double> v = trace.disturbance_norms();

  QuadraticRateFit fit;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) {
    const double lo = std::min(e[k], e[k + 1]);
    const double hi = std::max(e[k], e[k + 1]);
    if (hi < e_lo || lo > e_hi || e[k] <= 0.0) continue;
    const double vk = k < v.size() ? v[k] : 0.0;
    const double c_k =
        std::max(0.0, (e[k + 1] - kappa_hat * e[k] * vk) / (e[k] * e[k]));
    fit.c = std::max(fit.c, c_k);
    fit.per_step_gamma.push_back(kappa_hat * e[k]);
    ++fit.steps_used;
  }
  if (fit.steps_used < 3) {
    throw SolverError(SolverError::Code::kInsufficientData,
                      "fit_quadratic_rate: fewer than 3 steps in window");
  }

  try {
    const IssEstimate lin = estimate_iss_gains(trace, zbar);
    if (lin.feasible) fit.alpha_ref = lin.alpha;
  } catch (const SolverError&) {
    // keep alpha_ref = 1
  }
  // A genuinely quadratic trace has c * e_lo far below the linear
  // contraction; comparable magnitude flags a merely linear rate.
  fit.not_quadratic = fit.c * e_lo > 0.5 * fit.alpha_ref;
  return fit;
}

BallContainmentReport ball_containment(const std::vector<Trace>& traces,
                                       const Vector& zbar, double gamma_hat,
                                       double slack, double solver_tol) {
  BallContainmentReport report;
  report.all_pass = true;
  std::map<double, std::pair<double, int>> levels;  // sup -> (sum, count)

  for (const Trace& t : traces) {
    BallContainmentEntry entry;
    double sup = 0.0;
    for (const Vector& vk : t.disturbances) sup = std::max(sup, vk.norm());
    entry.sup_norm = sup;

    const std::vector<double> e = errors_from_trace(t, zbar);
    const std::size_t n = e.size();
    const std::size_t start = n - std::max<std::size_t>(1, n / 4);
    for (std::size_t k = start; k < n; ++k) {
      entry.limsup_error = std::max(entry.limsup_error, e[k]);
    }
    entry.bound = sup > 0.0 ? gamma_hat * sup * (1.0 + slack) : solver_tol;
    entry.pass = entry.limsup_error <= entry.bound;
    report.all_pass = report.all_pass && entry.pass;
    report.entries.push_back(entry);

    if (sup > 0.0) {
      auto& agg = levels[sup];
      agg.first += entry.limsup_error;
      agg.second += 1;
    }
  }

  double prev_mean = -1.0;
  for (const auto& [sup, agg] : levels) {
    const double mean = agg.first / agg.second;
    if (prev_mean > 0.0) report.level_ratios.push_back(mean / prev_mean);
    prev_mean = mean;
  }
  return report;
}

namespace {

double lip_p_estimate(const ParametrizedGe& pge, int axis,
                      const ProbeOptions& opts) {
  const int dim_p = axis == 0 ? pge.dim_p1 : pge.dim_p2;
  double lip = 0.0;
  for (int s = 0; s < opts.samples; ++s) {
    Rng rng(Rng::mix(opts.seed + 101 + axis, static_cast<std::uint64_t>(s)));
    const Vector z = pge.zbar + rng.ball(pge.dim_z, opts.radius);
    const Vector dp = rng.ball(dim_p, opts.radius);
    if (dp.norm() == 0.0) continue;
    const Vector p1 = axis == 0 ? Vector(pge.pbar1 + dp) : pge.pbar1;
    const Vector p2 = axis == 1 ? Vector(pge.pbar2 + dp) : pge.pbar2;
    const double diff =
        (pge.f(z, p1, p2) - pge.f(z, pge.pbar1, pge.pbar2)).norm();
    lip = std::max(lip, diff / dp.norm());
  }
  return lip;
}

double mu_estimate(const ParametrizedGe& pge, const ProbeOptions& opts) {
  // Lipschitz modulus of x -> f(x, p) - f(x, pbar) near (zbar, pbar).
  double mu = 0.0;
  const Vector f_base = pge.f(pge.zbar, pge.pbar1, pge.pbar2);
  for (int s = 0; s < opts.samples; ++s) {
    Rng rng(Rng::mix(opts.seed + 777, static_cast<std::uint64_t>(s)));
    const Vector dz = rng.ball(pge.dim_z, opts.radius);
    if (dz.norm() == 0.0) continue;
    const Vector z = pge.zbar + dz;
    const Vector p1 = pge.pbar1 + rng.ball(pge.dim_p1, opts.radius);
    const Vector p2 = pge.pbar2 + rng.ball(pge.dim_p2, opts.radius);
    const double diff = ((pge.f(z, p1, p2) - pge.f(z, pge.pbar1, pge.pbar2)) -
                         (pge.f(pge.zbar, p1, p2) - f_base))
                            .norm();
    mu = std::max(mu, diff / dz.norm());
  }
  return mu;
}

}  // namespace

SolutionMapProbe probe_solution_map(const ParametrizedGe& pge,
                                    const ProbeOptions& opts) {
  SolutionMapProbe probe;
  probe.pbar1 = pge.pbar1;
  probe.pbar2 = pge.pbar2;

  // Regularity of the linearized equation at the base solution.
  const Matrix a_jac = pge.jac(pge.zbar, pge.pbar1, pge.pbar2);
  const Vector f_base = pge.f(pge.zbar, pge.pbar1, pge.pbar2);
  MixedAvi lin(f_base - a_jac * pge.zbar, a_jac, pge.cone);
  const RegularityEstimate reg = estimate_kappa(
      lin, pge.zbar, opts.kappa_radius, opts.kappa_samples, opts.seed);
  probe.kappa_hat = std::max(reg.kappa, reg.pattern_inverse_max());
  probe.mu_hat = mu_estimate(pge, opts);

  if (probe.kappa_hat * probe.mu_hat >= 1.0) {
    probe.omega = kInf;
    probe.bound_ok = false;
    return probe;
  }
  probe.omega = probe.kappa_hat / (1.0 - probe.kappa_hat * probe.mu_hat);

  probe.lip_p1 = lip_p_estimate(pge, 0, opts);
  probe.lip_p2 = lip_p_estimate(pge, 1, opts);

  for (int axis = 0; axis < 2; ++axis) {
    double ratio = 0.0;
    for (int s = 0; s < opts.samples; ++s) {
      Rng rng(Rng::mix(opts.seed + 11 + axis, static_cast<std::uint64_t>(s)));
      const int dim_p = axis == 0 ? pge.dim_p1 : pge.dim_p2;
      const Vector dp = rng.ball(dim_p, opts.radius);
      if (dp.norm() == 0.0) continue;
      const Vector p1 = axis == 0 ? Vector(pge.pbar1 + dp) : pge.pbar1;
      const Vector p2 = axis == 1 ? Vector(pge.pbar2 + dp) : pge.pbar2;
      try {
        const Vector z = pge.solve(p1, p2, pge.zbar);
        ratio = std::max(ratio, (z - pge.zbar).norm() / dp.norm());
      } catch (const SolverError&) {
        ++probe.solver_failures;
      }
    }
    (axis == 0 ? probe.ratio_p1 : probe.ratio_p2) = ratio;
  }

  probe.bound_ok =
      probe.ratio_p1 <= probe.omega * probe.lip_p1 * (1.0 + opts.slack) &&
      probe.ratio_p2 <= probe.omega * probe.lip_p2 * (1.0 + opts.slack);
  return probe;
}

}  // namespace genewton
