#include "kvh/observables.hpp"

namespace kvh {
namespace {

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

Observable Observable::hamiltonian(const HamiltonianModel& model) {
  Observable o;
  o.kind_ = Kind::model;
  o.model_ = model;
  return o;
}

Observable Observable::linear_p(const std::array<double, 3>& xi) {
  Observable o;
  o.kind_ = Kind::linear_p;
  o.xi_ = xi;
  return o;
}

Observable Observable::linear_q(const std::array<double, 3>& xi) {
  Observable o;
  o.kind_ = Kind::linear_q;
  o.xi_ = xi;
  return o;
}

Observable Observable::angular(const std::array<double, 3>& xi) {
  Observable o;
  o.kind_ = Kind::angular;
  o.xi_ = xi;
  return o;
}

double Observable::value(const PhasePoint& z) const {
  switch (kind_) {
    case Kind::model: return model_.value(z);
    case Kind::linear_p: {
      double s = 0;
      for (int i = 0; i < z.n; ++i) s += z.p[i] * xi_[i];
      return s;
    }
    case Kind::linear_q: {
      double s = 0;
      for (int i = 0; i < z.n; ++i) s += z.q[i] * xi_[i];
      return s;
    }
    case Kind::angular: {
      const auto l = cross(z.q, z.p);
      return l[0] * xi_[0] + l[1] * xi_[1] + l[2] * xi_[2];
    }
  }
  return 0.0;
}

PhasePoint Observable::grad(const PhasePoint& z) const {
  PhasePoint g;
  g.n = z.n;
  switch (kind_) {
    case Kind::model: return model_.grad(z);
    case Kind::linear_p:
      for (int i = 0; i < z.n; ++i) g.p[i] = xi_[i];
      break;
    case Kind::linear_q:
      for (int i = 0; i < z.n; ++i) g.q[i] = xi_[i];
      break;
    case Kind::angular: {
      // d/dq (q x p).xi = p x xi, d/dp (q x p).xi = xi x q
      const auto gq = cross(z.p, xi_);
      const auto gp = cross(xi_, z.q);
      for (int i = 0; i < 3; ++i) {
        g.q[i] = gq[i];
        g.p[i] = gp[i];
      }
      break;
    }
  }
  return g;
}

PhasePoint Observable::vector_field(const PhasePoint& z) const {
  const PhasePoint g = grad(z);
  PhasePoint x;
  x.n = z.n;
  for (int i = 0; i < z.n; ++i) {
    x.q[i] = g.p[i];
    x.p[i] = -g.q[i];
  }
  return x;
}

double Observable::phase_term(const PhasePoint& z) const {
  switch (kind_) {
    case Kind::model: return model_.phase_term(z);
    case Kind::linear_p: return 0.5 * value(z);
    case Kind::linear_q: return 0.5 * value(z);
    case Kind::angular: return 0.0;  // degree-2 homogeneous
  }
  return 0.0;
}

Observable bracket_linear_p_with(const std::array<double, 3>& xi, const HamiltonianModel& model) {
  // {p.xi, H} = -xi . dH/dq. Representable when dH/dq is linear in q.
  switch (model.kind()) {
    case HamiltonianKind::harmonic: {
      const double k = model.param("k");
      return Observable::linear_q({-k * xi[0], -k * xi[1], -k * xi[2]});
    }
    case HamiltonianKind::free_particle:
      return Observable::linear_q({0, 0, 0});
    default:
      fail(ErrorCode::invalid_argument, "bracket_linear_p_with: analytic bracket catalogued only for linear forces");
  }
}

}  // namespace kvh
