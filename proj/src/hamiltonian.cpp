#include "kvh/hamiltonian.hpp"

#include <cmath>

namespace kvh {
namespace {

double norm3(const std::array<double, 3>& v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

HamiltonianModel HamiltonianModel::harmonic(double k) {
  if (!(k > 0)) fail(ErrorCode::invalid_argument, "harmonic: spring constant k must be > 0");
  HamiltonianModel m;
  m.kind_ = HamiltonianKind::harmonic;
  m.k_ = k;
  return m;
}

HamiltonianModel HamiltonianModel::anharmonic(double a, double b) {
  if (!(b > 0)) fail(ErrorCode::invalid_argument, "anharmonic: quartic coefficient b must be > 0");
  HamiltonianModel m;
  m.kind_ = HamiltonianKind::anharmonic;
  m.a_ = a;
  m.b_ = b;
  return m;
}

HamiltonianModel HamiltonianModel::kepler_reduced(double mu, double lambda, double r_min) {
  if (!(mu > 0)) fail(ErrorCode::invalid_argument, "kepler_reduced: reduced mass mu must be > 0");
  if (!(lambda > 0)) fail(ErrorCode::invalid_argument, "kepler_reduced: coupling lambda must be > 0");
  if (!(r_min > 0)) fail(ErrorCode::invalid_argument, "kepler_reduced: r_min must be > 0");
  HamiltonianModel m;
  m.kind_ = HamiltonianKind::kepler_reduced;
  m.mu_ = mu;
  m.lambda_ = lambda;
  m.r_min_ = r_min;
  return m;
}

HamiltonianModel HamiltonianModel::free_particle(double mass) {
  if (!(mass > 0)) fail(ErrorCode::invalid_argument, "free: mass must be > 0");
  HamiltonianModel m;
  m.kind_ = HamiltonianKind::free_particle;
  m.mass_ = mass;
  return m;
}

HamiltonianModel HamiltonianModel::quadratic(std::span<const double> alpha, std::span<const double> beta) {
  if (alpha.size() != beta.size() || alpha.empty() || alpha.size() > 3)
    fail(ErrorCode::invalid_argument, "quadratic: alpha and beta need equal length 1..3");
  HamiltonianModel m;
  m.kind_ = HamiltonianKind::quadratic;
  m.quad_n_ = static_cast<int>(alpha.size());
  for (int i = 0; i < m.quad_n_; ++i) {
    m.alpha_[i] = alpha[i];
    m.beta_[i] = beta[i];
  }
  return m;
}

std::string HamiltonianModel::describe() const {
  switch (kind_) {
    case HamiltonianKind::harmonic: return "harmonic(k=" + std::to_string(k_) + ")";
    case HamiltonianKind::anharmonic:
      return "anharmonic(a=" + std::to_string(a_) + ", b=" + std::to_string(b_) + ")";
    case HamiltonianKind::kepler_reduced:
      return "kepler_reduced(mu=" + std::to_string(mu_) + ", lambda=" + std::to_string(lambda_) +
             ", r_min=" + std::to_string(r_min_) + ")";
    case HamiltonianKind::free_particle: return "free(m=" + std::to_string(mass_) + ")";
    case HamiltonianKind::quadratic: return "quadratic(n=" + std::to_string(quad_n_) + ")";
  }
  return "?";
}

double HamiltonianModel::param(const char* name) const {
  const std::string s(name);
  if (s == "k") return k_;
  if (s == "a") return a_;
  if (s == "b") return b_;
  if (s == "mu") return mu_;
  if (s == "lambda") return lambda_;
  if (s == "r_min") return r_min_;
  if (s == "m") return mass_;
  fail(ErrorCode::invalid_argument, "unknown model parameter: " + s);
}

void HamiltonianModel::check_regular(const PhasePoint& z) const {
  if (kind_ == HamiltonianKind::kepler_reduced && norm3(z.q, z.n) < r_min_)
    fail(ErrorCode::singular_region, "kepler_reduced: |q| < r_min");
}

double HamiltonianModel::value(const PhasePoint& z) const {
  check_regular(z);
  const double p2 = dot3(z.p, z.p, z.n);
  const double q2 = dot3(z.q, z.q, z.n);
  switch (kind_) {
    case HamiltonianKind::harmonic: return p2 + 0.5 * k_ * q2;
    case HamiltonianKind::anharmonic: return p2 - a_ * q2 + b_ * q2 * q2;
    case HamiltonianKind::kepler_reduced: return 0.5 * p2 / mu_ - lambda_ / std::sqrt(q2);
    case HamiltonianKind::free_particle: return 0.5 * p2 / mass_;
    case HamiltonianKind::quadratic: {
      double h = 0.0;
      for (int i = 0; i < z.n; ++i) h += alpha_[i] * z.q[i] * z.q[i] + beta_[i] * z.p[i] * z.p[i];
      return h;
    }
  }
  return 0.0;
}

PhasePoint HamiltonianModel::grad(const PhasePoint& z) const {
  check_regular(z);
  PhasePoint g;
  g.n = z.n;
  switch (kind_) {
    case HamiltonianKind::harmonic:
      for (int i = 0; i < z.n; ++i) {
        g.q[i] = k_ * z.q[i];
        g.p[i] = 2.0 * z.p[i];
      }
      break;
    case HamiltonianKind::anharmonic: {
      const double q2 = dot3(z.q, z.q, z.n);
      for (int i = 0; i < z.n; ++i) {
        g.q[i] = (-2.0 * a_ + 4.0 * b_ * q2) * z.q[i];
        g.p[i] = 2.0 * z.p[i];
      }
      break;
    }
    case HamiltonianKind::kepler_reduced: {
      const double r = norm3(z.q, z.n);
      const double r3 = r * r * r;
      for (int i = 0; i < z.n; ++i) {
        g.q[i] = lambda_ * z.q[i] / r3;
        g.p[i] = z.p[i] / mu_;
      }
      break;
    }
    case HamiltonianKind::free_particle:
      for (int i = 0; i < z.n; ++i) {
        g.q[i] = 0.0;
        g.p[i] = z.p[i] / mass_;
      }
      break;
    case HamiltonianKind::quadratic:
      for (int i = 0; i < z.n; ++i) {
        g.q[i] = 2.0 * alpha_[i] * z.q[i];
        g.p[i] = 2.0 * beta_[i] * z.p[i];
      }
      break;
  }
  return g;
}

PhasePoint HamiltonianModel::vector_field(const PhasePoint& z) const {
  const PhasePoint g = grad(z);
  PhasePoint x;
  x.n = z.n;
  for (int i = 0; i < z.n; ++i) {
    x.q[i] = g.p[i];
    x.p[i] = -g.q[i];
  }
  return x;
}

double HamiltonianModel::phase_term(const PhasePoint& z) const {
  if (quadratic_class()) return 0.0;
  const PhasePoint g = grad(z);
  return value(z) - 0.5 * (dot3(z.q, g.q, z.n) + dot3(z.p, g.p, z.n));
}

double poisson_bracket(const PhasePoint& f_grad, const PhasePoint& g_grad) {
  if (f_grad.n != g_grad.n) fail(ErrorCode::invalid_argument, "poisson_bracket: dimension mismatch");
  return dot3(f_grad.q, g_grad.p, f_grad.n) - dot3(f_grad.p, g_grad.q, f_grad.n);
}

std::array<double, 3> HamiltonianModel::kinetic_drift_coefficients(int n) const {
  std::array<double, 3> c{};
  switch (kind_) {
    case HamiltonianKind::harmonic:
    case HamiltonianKind::anharmonic:
      for (int i = 0; i < n; ++i) c[i] = 2.0;
      break;
    case HamiltonianKind::kepler_reduced:
      for (int i = 0; i < n; ++i) c[i] = 1.0 / mu_;
      break;
    case HamiltonianKind::free_particle:
      for (int i = 0; i < n; ++i) c[i] = 1.0 / mass_;
      break;
    case HamiltonianKind::quadratic:
      for (int i = 0; i < n; ++i) c[i] = 2.0 * beta_[i];
      break;
  }
  return c;
}

PhasePoint flow_step(const HamiltonianModel& model, const PhasePoint& z, double dt) {
  if (!std::isfinite(dt)) fail(ErrorCode::invalid_argument, "flow_step: dt must be finite");
  const std::array<double, 3> drift = model.kinetic_drift_coefficients(z.n);
  PhasePoint half = z;
  for (int i = 0; i < z.n; ++i) half.q[i] = z.q[i] + 0.5 * dt * drift[i] * z.p[i];
  const PhasePoint gh = model.grad(half);  // throws SingularRegion mid-step if applicable
  PhasePoint out = half;
  for (int i = 0; i < z.n; ++i) {
    out.p[i] = z.p[i] - dt * gh.q[i];
    out.q[i] = half.q[i] + 0.5 * dt * drift[i] * out.p[i];
  }
  model.value(out);  // final singularity check
  return out;
}

FlowResult flow_to(const HamiltonianModel& model, const PhasePoint& z, double t, double dt) {
  FlowResult res;
  res.z = z;
  if (t == 0.0) return res;
  if (!(dt > 0) || !std::isfinite(t)) fail(ErrorCode::invalid_argument, "flow_to: need dt > 0 and finite t");
  const double steps_d = std::ceil(std::abs(t) / dt - 1e-12);
  if (steps_d > 1e9) fail(ErrorCode::invalid_argument, "flow_to: more than 1e9 steps requested");
  const long long steps = std::max(1LL, static_cast<long long>(steps_d));
  const double h = t / static_cast<double>(steps);

  const int n = z.n;
  const std::array<double, 3> drift = model.kinetic_drift_coefficients(n);
  const bool with_phase = !model.quadratic_class();

  PhasePoint cur = res.z;
  double phase = 0.0;
  for (long long s = 0; s < steps; ++s) {
    PhasePoint half = cur;
    for (int i = 0; i < n; ++i) half.q[i] = cur.q[i] + 0.5 * h * drift[i] * cur.p[i];
    PhasePoint gh;
    try {
      gh = model.grad(half);
      // a(z) is p-independent for diagonal quadratic kinetic parts, so the
      // half-step point is an exact midpoint sample in the only variable a
      // depends on
      if (with_phase) phase += h * model.phase_term(half);
    } catch (const Error&) {
      res.aborted = true;
      res.abort_time = static_cast<double>(s) * h;
      res.z = cur;
      res.phase = phase;
      return res;
    }
    PhasePoint next = half;
    for (int i = 0; i < n; ++i) {
      next.p[i] = cur.p[i] - h * gh.q[i];
      next.q[i] = half.q[i] + 0.5 * h * drift[i] * next.p[i];
    }
    cur = next;
  }
  try {
    model.value(cur);
  } catch (const Error&) {
    res.aborted = true;
    res.abort_time = t;
    res.z = cur;
    res.phase = phase;
    return res;
  }
  res.z = cur;
  res.phase = phase;
  return res;
}

}  // namespace kvh
