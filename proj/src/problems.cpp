#include "genewton/problems.hpp"

#include <cmath>

namespace genewton {

const char* to_string(DisturbanceChannel c) {
  switch (c) {
    case DisturbanceChannel::kAdditiveF: return "f";
    case DisturbanceChannel::kAdditiveG: return "g";
    case DisturbanceChannel::kAdditiveGradH: return "grad_h";
    case DisturbanceChannel::kGradientH: return "gradient";
  }
  return "unknown";
}

std::optional<DisturbanceChannel> parse_channel(const std::string& name) {
  if (name == "f") return DisturbanceChannel::kAdditiveF;
  if (name == "g") return DisturbanceChannel::kAdditiveG;
  if (name == "grad_h") return DisturbanceChannel::kAdditiveGradH;
  if (name == "gradient") return DisturbanceChannel::kGradientH;
  return std::nullopt;
}

int channel_dim(DisturbanceChannel c, int dim_x, int dim_g) {
  switch (c) {
    case DisturbanceChannel::kAdditiveF: return dim_x + dim_g;
    case DisturbanceChannel::kAdditiveG: return dim_g;
    case DisturbanceChannel::kAdditiveGradH: return dim_x;
    case DisturbanceChannel::kGradientH:
      return (dim_x + dim_g) * (dim_x + dim_g);
  }
  return 0;
}

namespace {

// Pieces of an undisturbed NLP; the channel wiring is shared.
struct NlpData {
  int dim_x = 0;
  int dim_g = 0;
  std::function<double(const Vector&)> h;
  std::function<Vector(const Vector&)> grad_h;
  std::function<Vector(const Vector&)> g;
  std::function<Matrix(const Vector&)> jac_g;
  std::function<Matrix(const Vector&, const Vector&)> hess_l;  // (x, y)
  Box feasible_set = Box::free(0);
  std::optional<Vector> xbar, ybar;
};

NlpProblem wire_channel(const NlpData& d, DisturbanceChannel channel) {
  NlpProblem nlp;
  nlp.dim_x = d.dim_x;
  nlp.dim_g = d.dim_g;
  nlp.dim_v = channel_dim(channel, d.dim_x, d.dim_g);
  nlp.feasible_set = d.feasible_set;
  nlp.xbar = d.xbar;
  nlp.ybar = d.ybar;

  const int n = d.dim_x, m = d.dim_g;
  switch (channel) {
    case DisturbanceChannel::kAdditiveF:
      nlp.h = [d](const Vector& x, const Vector& v) {
        return d.h(x) + v.head(d.dim_x).dot(x);
      };
      nlp.grad_h = [d, n](const Vector& x, const Vector& v) {
        return (d.grad_h(x) + v.head(n)).eval();
      };
      nlp.g = [d, m](const Vector& x, const Vector& v) {
        return (d.g(x) + v.tail(m)).eval();
      };
      break;
    case DisturbanceChannel::kAdditiveG:
      nlp.h = [d](const Vector& x, const Vector&) { return d.h(x); };
      nlp.grad_h = [d](const Vector& x, const Vector&) { return d.grad_h(x); };
      nlp.g = [d](const Vector& x, const Vector& v) {
        return (d.g(x) + v).eval();
      };
      break;
    case DisturbanceChannel::kAdditiveGradH:
      nlp.h = [d](const Vector& x, const Vector& v) {
        return d.h(x) + v.dot(x);
      };
      nlp.grad_h = [d](const Vector& x, const Vector& v) {
        return (d.grad_h(x) + v).eval();
      };
      nlp.g = [d](const Vector& x, const Vector&) { return d.g(x); };
      break;
    case DisturbanceChannel::kGradientH:
      nlp.h = [d](const Vector& x, const Vector&) { return d.h(x); };
      nlp.grad_h = [d](const Vector& x, const Vector&) { return d.grad_h(x); };
      nlp.g = [d](const Vector& x, const Vector&) { return d.g(x); };
      break;
  }
  nlp.jac_g = [d](const Vector& x, const Vector&) { return d.jac_g(x); };
  if (d.hess_l) {
    nlp.hess_lagrangian = [d](const Vector& x, const Vector& y,
                              const Vector&) { return d.hess_l(x, y); };
  }
  return nlp;
}

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

NlpData scalar_eq_data() {
  // min x^2  s.t.  x - 1 = 0, C = R. Solution (1, -2).
  NlpData d;
  d.dim_x = 1;
  d.dim_g = 1;
  d.h = [](const Vector& x) { return x[0] * x[0]; };
  d.grad_h = [](const Vector& x) { return vec1(2.0 * x[0]); };
  d.g = [](const Vector& x) { return vec1(x[0] - 1.0); };
  d.jac_g = [](const Vector&) { return Matrix::Identity(1, 1); };
  d.hess_l = [](const Vector&, const Vector&) {
    return (2.0 * Matrix::Identity(1, 1)).eval();
  };
  d.feasible_set = Box::free(1);
  d.xbar = vec1(1.0);
  d.ybar = vec1(-2.0);
  return d;
}

NlpData box_qp_data() {
  // min 0.5 x'Qx + c'x  s.t.  x1 + x2 + x3 = 1.5, x in [0,1]^3.
  // Q = diag(1,2,3), c = (-2, 0, 2); solution x = (1, 0.5, 0), y = -1 with
  // the first component at its upper and the third at its lower bound.
  NlpData d;
  d.dim_x = 3;
  d.dim_g = 1;
  const Vector qdiag = vec3(1.0, 2.0, 3.0);
  const Vector c = vec3(-2.0, 0.0, 2.0);
  d.h = [qdiag, c](const Vector& x) {
    return 0.5 * x.dot(qdiag.asDiagonal() * x) + c.dot(x);
  };
  d.grad_h = [qdiag, c](const Vector& x) {
    return (qdiag.asDiagonal() * x + c).eval();
  };
  d.g = [](const Vector& x) { return vec1(x.sum() - 1.5); };
  d.jac_g = [](const Vector&) {
    return Matrix::Ones(1, 3);
  };
  d.hess_l = [qdiag](const Vector&, const Vector&) {
    return Matrix(qdiag.asDiagonal());
  };
  d.feasible_set = Box::bounds(0.0, 1.0, 3);
  d.xbar = vec3(1.0, 0.5, 0.0);
  d.ybar = vec1(-1.0);
  return d;
}

NlpData two_constraint_data() {
  // min 0.5 |x|^2  s.t.  x1 + x2 = 1, x1 - x3 = 0.
  // Solution x = (1/3, 2/3, 1/3), y = (-2/3, 1/3).
  NlpData d;
  d.dim_x = 3;
  d.dim_g = 2;
  d.h = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  d.grad_h = [](const Vector& x) { return x; };
  Matrix a(2, 3);
  a << 1, 1, 0, 1, 0, -1;
  const Vector b = vec2(1.0, 0.0);
  d.g = [a, b](const Vector& x) { return (a * x - b).eval(); };
  d.jac_g = [a](const Vector&) { return a; };
  d.hess_l = [](const Vector&, const Vector&) {
    return Matrix(Matrix::Identity(3, 3));
  };
  d.feasible_set = Box::free(3);
  d.xbar = vec3(1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0);
  d.ybar = vec2(-2.0 / 3.0, 1.0 / 3.0);
  return d;
}

NlpData rosenbrock_circle_data() {
  // min (1-x1)^2 + 100 (x2 - x1^2)^2  s.t.  x1^2 + x2^2 = 2.
  // Solution (1, 1) with multiplier 0.
  NlpData d;
  d.dim_x = 2;
  d.dim_g = 1;
  d.h = [](const Vector& x) {
    const double t = x[1] - x[0] * x[0];
    return (1.0 - x[0]) * (1.0 - x[0]) + 100.0 * t * t;
  };
  d.grad_h = [](const Vector& x) {
    const double t = x[1] - x[0] * x[0];
    return vec2(-2.0 * (1.0 - x[0]) - 400.0 * x[0] * t, 200.0 * t);
  };
  d.g = [](const Vector& x) { return vec1(x.squaredNorm() - 2.0); };
  d.jac_g = [](const Vector& x) {
    Matrix j(1, 2);
    j << 2.0 * x[0], 2.0 * x[1];
    return j;
  };
  d.hess_l = [](const Vector& x, const Vector& y) {
    Matrix h(2, 2);
    h(0, 0) = 2.0 - 400.0 * (x[1] - x[0] * x[0]) + 800.0 * x[0] * x[0];
    h(0, 1) = -400.0 * x[0];
    h(1, 0) = -400.0 * x[0];
    h(1, 1) = 200.0;
    h += 2.0 * y[0] * Matrix::Identity(2, 2);
    return h;
  };
  d.feasible_set = Box::free(2);
  d.xbar = vec2(1.0, 1.0);
  d.ybar = vec1(0.0);
  return d;
}

GeneralizedEquation scalar_root_geneq(DisturbanceChannel channel) {
  // Scalar equation z^2 - 1 = 0 on the free cone; root 1.
  GeneralizedEquation ge;
  ge.dim_z = 1;
  ge.dim_v = 1;
  ge.cone = Box::free(1);
  if (channel == DisturbanceChannel::kGradientH) {
    ge.f = [](const Vector& z, const Vector&) {
      return vec1(z[0] * z[0] - 1.0);
    };
  } else {
    ge.f = [](const Vector& z, const Vector& v) {
      return vec1(z[0] * z[0] - 1.0 + v[0]);
    };
  }
  ge.jacobian = [](const Vector& z, const Vector&) {
    return (2.0 * z[0] * Matrix::Identity(1, 1)).eval();
  };
  ge.zbar = vec1(1.0);
  return ge;
}

}  // namespace

const std::vector<ProblemDefinition>& problem_registry() {
  static const std::vector<ProblemDefinition> registry = [] {
    std::vector<ProblemDefinition> probs;

    {
      ProblemDefinition p;
      p.name = "scalar-root";
      p.description = "scalar equation z^2 - 1 = 0 on the free cone";
      p.is_nlp = false;
      p.dim_x = 1;
      p.dim_g = 0;
      p.make_geneq = scalar_root_geneq;
      p.start = vec1(2.0);
      probs.push_back(p);
    }

    auto add_nlp = [&probs](const std::string& name,
                            const std::string& description, NlpData data,
                            Vector start) {
      ProblemDefinition p;
      p.name = name;
      p.description = description;
      p.is_nlp = true;
      p.dim_x = data.dim_x;
      p.dim_g = data.dim_g;
      p.make_nlp = [data](DisturbanceChannel c) { return wire_channel(data, c); };
      p.make_geneq = [data](DisturbanceChannel c) {
        return make_kkt_geneq(wire_channel(data, c));
      };
      p.start = std::move(start);
      probs.push_back(p);
    };

    add_nlp("scalar-eq", "min x^2 s.t. x = 1; KKT solution (1, -2)",
            scalar_eq_data(), vec2(0.0, 0.0));
    // Start inside the local neighbourhood: farther out every bound clamps
    // and the dual row of the first subproblem goes singular.
    add_nlp("box-qp",
            "3-d box-constrained QP with one equality and active bounds",
            box_qp_data(), [] {
              Vector s(4);
              s << 0.9, 0.4, 0.1, -0.8;
              return s;
            }());
    add_nlp("two-constraint", "least norm under two linear equalities",
            two_constraint_data(), [] {
              Vector s(5);
              s.setZero();
              return s;
            }());
    add_nlp("rosenbrock-circle",
            "Rosenbrock objective on the circle x1^2 + x2^2 = 2",
            rosenbrock_circle_data(), vec3(1.05, 0.95, 0.0));
    return probs;
  }();
  return registry;
}

const ProblemDefinition* find_problem(const std::string& name) {
  for (const ProblemDefinition& p : problem_registry()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const std::vector<ParametrizedDefinition>& parametrized_registry() {
  static const std::vector<ParametrizedDefinition> registry = [] {
    std::vector<ParametrizedDefinition> probs;

    {
      ParametrizedDefinition p;
      p.name = "affine-probe";
      p.description = "affine equation z = p1 + 2 p2 with solution map slope (1, 2)";
      p.make = [] {
        ParametrizedGe pge;
        pge.dim_z = 1;
        pge.dim_p1 = 1;
        pge.dim_p2 = 1;
        pge.cone = Box::free(1);
        pge.f = [](const Vector& z, const Vector& p1, const Vector& p2) {
          return vec1(z[0] - p1[0] - 2.0 * p2[0]);
        };
        pge.jacobian = [](const Vector&, const Vector&, const Vector&) {
          return Matrix(Matrix::Identity(1, 1));
        };
        pge.pbar1 = vec1(0.0);
        pge.pbar2 = vec1(0.0);
        pge.zbar = vec1(0.0);
        return pge;
      };
      probs.push_back(p);
    }

    {
      ParametrizedDefinition p;
      p.name = "scalar-eq-param";
      p.description =
          "KKT of min x^2 + p2 x s.t. x = p1; solution (p1, -2 p1 - p2)";
      p.make = [] {
        ParametrizedGe pge;
        pge.dim_z = 2;
        pge.dim_p1 = 1;
        pge.dim_p2 = 1;
        pge.cone = Box::free(2);
        pge.f = [](const Vector& z, const Vector& p1, const Vector& p2) {
          return vec2(2.0 * z[0] + p2[0] + z[1], z[0] - p1[0]);
        };
        pge.jacobian = [](const Vector&, const Vector&, const Vector&) {
          Matrix m(2, 2);
          m << 2, 1, 1, 0;
          return m;
        };
        pge.pbar1 = vec1(1.0);
        pge.pbar2 = vec1(0.0);
        pge.zbar = vec2(1.0, -2.0);
        return pge;
      };
      probs.push_back(p);
    }
    return probs;
  }();
  return registry;
}

const ParametrizedDefinition* find_parametrized(const std::string& name) {
  for (const ParametrizedDefinition& p : parametrized_registry()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

NlpProblem build_inline_nlp(const InlineNlpSpec& spec) {
  require(spec.dim > 0, "inline problem: dim must be positive");
  NlpData d;
  d.dim_x = spec.dim;

  switch (spec.objective) {
    case InlineNlpSpec::Objective::kQuadratic: {
      Matrix q = spec.q.size() > 0 ? spec.q
                                   : Matrix(Matrix::Identity(spec.dim, spec.dim));
      Vector c = spec.c.size() > 0 ? spec.c : Vector(Vector::Zero(spec.dim));
      require(q.rows() == spec.dim && q.cols() == spec.dim,
              "inline problem: Q dimension");
      require(c.size() == spec.dim, "inline problem: c dimension");
      d.h = [q, c](const Vector& x) { return 0.5 * x.dot(q * x) + c.dot(x); };
      d.grad_h = [q, c](const Vector& x) { return (q * x + c).eval(); };
      d.hess_l = [q](const Vector&, const Vector&) { return q; };
      break;
    }
    case InlineNlpSpec::Objective::kRosenbrock: {
      require(spec.dim == 2, "inline rosenbrock: dim must be 2");
      const double a = spec.rosenbrock_a, b = spec.rosenbrock_b;
      d.h = [a, b](const Vector& x) {
        const double t = x[1] - x[0] * x[0];
        return (a - x[0]) * (a - x[0]) + b * t * t;
      };
      d.grad_h = [a, b](const Vector& x) {
        const double t = x[1] - x[0] * x[0];
        return vec2(-2.0 * (a - x[0]) - 4.0 * b * x[0] * t, 2.0 * b * t);
      };
      break;
    }
  }

  switch (spec.constraint) {
    case InlineNlpSpec::Constraint::kNone:
      d.dim_g = 0;
      d.g = [](const Vector&) { return Vector(0); };
      d.jac_g = [n = spec.dim](const Vector&) { return Matrix(0, n); };
      break;
    case InlineNlpSpec::Constraint::kLinear: {
      require(spec.a.cols() == spec.dim, "inline problem: A columns");
      require(spec.b.size() == spec.a.rows(), "inline problem: b rows");
      const Matrix a = spec.a;
      const Vector b = spec.b;
      d.dim_g = static_cast<int>(a.rows());
      d.g = [a, b](const Vector& x) { return (a * x - b).eval(); };
      d.jac_g = [a](const Vector&) { return a; };
      break;
    }
    case InlineNlpSpec::Constraint::kCircle: {
      const double r2 = spec.circle_radius_sq;
      d.dim_g = 1;
      d.g = [r2](const Vector& x) { return vec1(x.squaredNorm() - r2); };
      d.jac_g = [](const Vector& x) {
        Matrix j(1, x.size());
        j = 2.0 * x.transpose();
        return j;
      };
      break;
    }
  }
  // Second-order data for nonquadratic objectives comes from differences.
  if (spec.objective == InlineNlpSpec::Objective::kRosenbrock ||
      spec.constraint == InlineNlpSpec::Constraint::kCircle) {
    d.hess_l = nullptr;
  }

  if (spec.lower.size() > 0 || spec.upper.size() > 0) {
    Vector lo = spec.lower.size() > 0 ? spec.lower
                                      : Vector(Vector::Constant(spec.dim, -kInf));
    Vector up = spec.upper.size() > 0 ? spec.upper
                                      : Vector(Vector::Constant(spec.dim, kInf));
    d.feasible_set = Box(lo, up);
  } else {
    d.feasible_set = Box::free(spec.dim);
  }

  return wire_channel(d, spec.channel);
}

}  // namespace genewton
