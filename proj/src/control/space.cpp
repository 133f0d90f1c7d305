#include <algorithm>
#include <cmath>
#include <limits>

#include "tempofleet/control.hpp"

namespace tempofleet::control {

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

namespace {

double smoothstep_d1(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = t * (1.0 - t);
  return 30.0 * a * a;
}

Disk enclose(const Disk& a, const Disk& b) {
  const Vec2 d = b.center - a.center;
  const double n = d.norm();
  if (n + b.radius <= a.radius) return a;
  if (n + a.radius <= b.radius) return b;
  const double r = 0.5 * (n + a.radius + b.radius);
  return {a.center + (r - a.radius) / n * d, r};
}

}  // namespace

FreeSpace::FreeSpace(const Disk& workspace, const std::vector<Disk>& obstacles, double entity_radius, double rbar,
                     double merge_gap)
    : workspace_(workspace), radius_(entity_radius), scale_(workspace.radius - entity_radius) {
  if (!(entity_radius > 0.0)) throw ControlError("entity radius must be positive");
  if (!(scale_ > 0.0)) throw ControlError("entity does not fit in the workspace");
  if (!(rbar > 0.0)) throw ControlError("rbar must be positive");
  for (const auto& o : obstacles) enlarged_.push_back({o.center, o.radius + entity_radius});

  const double gap_abs = merge_gap * scale_;
  merged_ = enlarged_;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < merged_.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < merged_.size() && !changed; ++j) {
        const double gap = (merged_[i].center - merged_[j].center).norm() - merged_[i].radius - merged_[j].radius;
        if (gap < gap_abs) {
          merged_[i] = enclose(merged_[i], merged_[j]);
          merged_.erase(merged_.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
        }
      }
  }

  double min_gap = std::numeric_limits<double>::infinity();
  double min_edge = std::numeric_limits<double>::infinity();
  double geo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < merged_.size(); ++i) {
    const Vec2 p = (merged_[i].center - workspace.center) / scale_;
    const double s = merged_[i].radius / scale_;
    const double edge = 1.0 - p.norm() - s;
    if (edge < merge_gap)
      throw ControlError("enlarged obstacle at (" + std::to_string(merged_[i].center.x()) + ", " +
                         std::to_string(merged_[i].center.y()) + ") meets the workspace boundary");
    min_edge = std::min(min_edge, edge);
    geo = std::min(geo, 0.5 * (1.0 - p.norm()));
    for (std::size_t j = 0; j < i; ++j) {
      min_gap = std::min(min_gap, (p - points_[j]).norm() - s - sizes_[j]);
      geo = std::min(geo, 0.5 * (p - points_[j]).norm());
    }
    points_.push_back(p);
    sizes_.push_back(s);
  }
  rbar_ = std::min(rbar, 0.999 * geo);
  width_ = std::min({rbar_, 0.45 * min_gap, 0.9 * min_edge});
}

bool FreeSpace::contains(const Vec2& x) const {
  if ((x - workspace_.center).norm() >= scale_) return false;
  for (const auto& o : merged_)
    if ((x - o.center).norm() <= o.radius) return false;
  return true;
}

double FreeSpace::clearance(const Vec2& x) const {
  double c = scale_ - (x - workspace_.center).norm();
  for (const auto& o : enlarged_) c = std::min(c, (x - o.center).norm() - o.radius);
  return c;
}

std::optional<Vec2> FreeSpace::try_transform(const Vec2& x, Mat2* jac) const {
  if (!contains(x)) return std::nullopt;
  const Vec2 y = (x - workspace_.center) / scale_;
  for (std::size_t l = 0; l < points_.size(); ++l) {
    const Vec2 rel = y - points_[l];
    const double d = rel.norm();
    const double s = sizes_[l];
    if (d >= s + width_) continue;
    // Annuli are disjoint, so at most one purge acts on y.
    const double t = (d - s) / width_;
    const double g = d - s * (1.0 - smoothstep(t));
    if (jac) {
      const double dg = 1.0 + s * smoothstep_d1(t) / width_;
      const Vec2 u = rel / d;
      const Mat2 uu = u * u.transpose();
      *jac = (dg * uu + (g / d) * (Mat2::Identity() - uu)) / scale_;
    }
    return Vec2(points_[l] + (g / d) * rel);
  }
  if (jac) *jac = Mat2::Identity() / scale_;
  return y;
}

Vec2 FreeSpace::transform(const Vec2& x, Mat2* jac) const {
  auto chi = try_transform(x, jac);
  if (!chi)
    throw ControlError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) + ") is outside the free space");
  return *chi;
}

Vec2 FreeSpace::inverse(const Vec2& chi) const {
  if (chi.norm() >= 1.0) throw ControlError("point is outside the unit disk");
  Vec2 y = chi;
  for (std::size_t l = 0; l < points_.size(); ++l) {
    const Vec2 rel = chi - points_[l];
    const double rho = rel.norm();
    const double s = sizes_[l];
    if (rho >= s + width_) continue;
    if (rho == 0.0) throw ControlError("obstacle points have no preimage");
    // g is strictly increasing on (s, s + w) with g(s) = 0, g(s + w) = s + w.
    double lo = s, hi = s + width_;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double g = mid - s * (1.0 - smoothstep((mid - s) / width_));
      (g < rho ? lo : hi) = mid;
    }
    y = points_[l] + (0.5 * (lo + hi)) * rel / rho;
    break;
  }
  return workspace_.center + scale_ * y;
}

}  // namespace tempofleet::control
