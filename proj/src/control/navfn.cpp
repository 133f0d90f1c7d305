#include <Eigen/LU>
#include <cmath>
#include <numeric>

#include "tempofleet/control.hpp"

namespace tempofleet::control {

Beta beta(double s, double tau) {
  if (!(s > 0.0)) throw ControlError("beta is undefined for s <= 0");
  if (s >= tau) return {1.0, 0.0, 0.0};
  const double u = s / tau;
  const double p = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  const double w = u * (1.0 - u);
  const double p1 = 30.0 * w * w;
  const double p2 = 60.0 * w * (1.0 - 2.0 * u);
  return {1.0 / p, -p1 / (p * p * tau), (2.0 * p1 * p1 / (p * p * p) - p2 / (p * p)) / (tau * tau)};
}

PointWorld point_world(const FreeSpace& fs, const Vec2& goal_x) {
  PointWorld pw;
  pw.points = fs.points();
  pw.rbar = fs.rbar();
  pw.goal = fs.transform(goal_x);
  pw.rbar_d = point_clearance(pw, pw.goal);
  return pw;
}

NavFn::NavFn(PointWorld pw, double k1, double k2, double tau) : pw_(std::move(pw)), k1_(k1), k2_(k2), tau_(tau) {
  if (!(k1 > 0.0 && k2 > 0.0)) throw ControlError("k1 and k2 must be positive");
  if (!(tau > 0.0)) throw ControlError("tau must be positive");
  // tau = rbar^2 is the boundary case; the influence balls are then still disjoint.
  if (tau > pw_.rbar * pw_.rbar * (1.0 + 1e-12))
    throw ControlError("tau " + std::to_string(tau) + " exceeds rbar^2 = " + std::to_string(pw_.rbar * pw_.rbar));
  if (!(tau < pw_.rbar_d))
    throw ControlError("tau " + std::to_string(tau) + " is not below the goal clearance " + std::to_string(pw_.rbar_d));
}

double NavFn::value(const Vec2& chi, Vec2* grad) const {
  const Vec2 e = chi - pw_.goal;
  double v = k1_ * e.squaredNorm();
  Vec2 g = 2.0 * k1_ * e;
  const Beta b0 = beta(1.0 - chi.squaredNorm(), tau_);
  v += k2_ * (b0.value - 1.0);
  g += k2_ * b0.d1 * (-2.0 * chi);
  for (const auto& b : pw_.points) {
    const Vec2 r = chi - b;
    const Beta bl = beta(r.squaredNorm(), tau_);
    v += k2_ * (bl.value - 1.0);
    g += k2_ * bl.d1 * 2.0 * r;
  }
  if (grad) *grad = g;
  return v;
}

double point_clearance(const PointWorld& pw, const Vec2& chi) {
  double c = 1.0 - chi.squaredNorm();
  for (const auto& b : pw.points) c = std::min(c, (chi - b).squaredNorm());
  return c;
}

double default_tau(const PointWorld& pw, const ControlParams& p, const std::optional<Vec2>& start_chi) {
  if (p.tau > 0.0) return p.tau;
  double tau = std::min(pw.rbar * pw.rbar, 0.5 * pw.rbar_d);
  if (start_chi) tau = std::min(tau, 0.5 * point_clearance(pw, *start_chi));
  return tau;
}

Navigator::Navigator(FreeSpace fs, const Vec2& goal, const ControlParams& p, const std::optional<Vec2>& start)
    : fs_(std::move(fs)), goal_(goal), nf_([&] {
        PointWorld pw = point_world(fs_, goal);
        std::optional<Vec2> start_chi;
        if (start) start_chi = fs_.transform(*start);
        const double tau = default_tau(pw, p, start_chi);
        return NavFn(std::move(pw), p.k1, p.k2, tau);
      }()) {}

bool Navigator::reference(const Vec2& x, Reference& out) const {
  auto chi = fs_.try_transform(x, &out.jac);
  if (!chi) return false;
  out.chi = *chi;
  nf_.value(out.chi, &out.grad);
  const double det = out.jac.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw ControlError("transform Jacobian is singular");
  out.v_d = -out.jac.inverse() * out.grad;
  return true;
}

Vec2 Navigator::v_d(const Vec2& x) const {
  Reference r;
  if (!reference(x, r)) throw ControlError("point is outside the free space");
  return r.v_d;
}

Vec2 Navigator::v_d_dot(const Vec2& x, const Vec2& v, double delta) const {
  Reference a, b;
  if (!reference(x, a)) throw ControlError("point is outside the free space");
  if (reference(x + delta * v, b)) return (b.v_d - a.v_d) / delta;
  if (reference(x - delta * v, b)) return (a.v_d - b.v_d) / delta;
  return Vec2::Zero();
}

Vec2 navigation_force(const ControlParams& p, const Reference& ref, const Vec2& vd_dot, const Vec2& e_v,
                      const Estimates& est) {
  return -p.k_phi * ref.jac.transpose() * ref.grad + est.m_hat * vd_dot - (p.k_v + 1.5 * est.alpha_hat) * e_v;
}

Estimates adaptation_rate(const ControlParams& p, const Vec2& e_v, const Vec2& vd_dot) {
  return {-p.k_m * e_v.dot(vd_dot), p.k_alpha * e_v.squaredNorm()};
}

std::vector<Vec2> transport_forces(const std::vector<double>& cf, const Vec2& u) {
  if (cf.empty()) throw ControlError("no load-sharing coefficients");
  double sum = 0.0;
  for (double c : cf) {
    if (!(c >= 0.0)) throw ControlError("load-sharing coefficients must be nonnegative");
    sum += c;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ControlError("load-sharing coefficients must sum to one");
  std::vector<Vec2> out;
  out.reserve(cf.size());
  for (double c : cf) out.push_back(c * u);
  return out;
}

}  // namespace tempofleet::control
