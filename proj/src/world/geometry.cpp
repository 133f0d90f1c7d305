#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tempofleet/world.hpp"

namespace tempofleet::world {

std::vector<Entity> entities(const Scenario& s, const GraspConfig& ag) {
  RobotSet busy = 0;
  for (RobotSet a : ag) busy |= a;
  std::vector<Entity> out;
  for (int i = 0; i < s.num_robots(); ++i)
    if (!has_robot(busy, i))
      out.push_back({EntityKind::Robot, robot_bit(i), i, -1, s.robots[static_cast<std::size_t>(i)].radius});
  for (int j = 0; j < s.num_objects(); ++j)
    if (ag[static_cast<std::size_t>(j)] == 0)
      out.push_back({EntityKind::Object, 0, -1, j, s.objects[static_cast<std::size_t>(j)].radius});
  for (int j = 0; j < s.num_objects(); ++j)
    if (ag[static_cast<std::size_t>(j)] != 0)
      out.push_back({EntityKind::Coupled, ag[static_cast<std::size_t>(j)], -1, j,
                     coupled_radius(s, j, ag[static_cast<std::size_t>(j)])});
  return out;
}

double coupled_radius(const Scenario& s, int object, RobotSet coalition) {
  if (coalition == 0) throw std::invalid_argument("coupled_radius needs a nonempty coalition");
  double rmax = 0.0;
  for (int i = 0; i < s.num_robots(); ++i)
    if (has_robot(coalition, i)) rmax = std::max(rmax, s.robots[static_cast<std::size_t>(i)].radius);
  return s.objects.at(static_cast<std::size_t>(object)).radius + 2.0 * rmax;
}

bool lambda_check(const Scenario& s, int object, RobotSet coalition) {
  double power = 0.0;
  for (int i = 0; i < s.num_robots(); ++i)
    if (has_robot(coalition, i)) power += s.robots[static_cast<std::size_t>(i)].power;
  return power >= s.objects.at(static_cast<std::size_t>(object)).required_power;
}

namespace {

// Calls visit(p) on candidate centers for a ball of radius r inside `region`:
// the center, then rings of growing radius. Stops when visit returns true.
template <class Visit>
void ring_sweep(const Disk& region, double r, double step, Visit&& visit) {
  const double R = region.radius;
  if (r > R) return;
  if (visit(region.center)) return;
  const double rho_max = (R - r) * (1.0 - 1e-12);
  if (rho_max <= 0) return;
  step = std::max(step, R * 1e-6);
  for (int k = 1;; ++k) {
    const double rho = std::min(k * step, rho_max);
    const int n = std::max(6, static_cast<int>(std::ceil(2.0 * std::numbers::pi * rho / step)));
    for (int m = 0; m < n; ++m) {
      const double th = 2.0 * std::numbers::pi * m / n;
      if (visit(Vec2(region.center.x() + rho * std::cos(th), region.center.y() + rho * std::sin(th)))) return;
    }
    if (rho >= rho_max) return;
  }
}

}  // namespace

std::optional<std::vector<Vec2>> pack_spheres(const Disk& region, const std::vector<double>& radii) {
  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] > radii[b]; });
  std::vector<Vec2> pos(radii.size());
  std::vector<std::size_t> placed;
  for (std::size_t idx : order) {
    const double r = radii[idx];
    if (r < 0) throw std::invalid_argument("pack_spheres: negative radius");
    bool ok = false;
    ring_sweep(region, r, std::max(r / 2, region.radius / 200), [&](const Vec2& p) {
      if ((p - region.center).norm() + r > region.radius) return false;
      for (std::size_t o : placed)
        if ((p - pos[o]).norm() < r + radii[o]) return false;
      pos[idx] = p;
      ok = true;
      return true;
    });
    if (!ok) return std::nullopt;
    placed.push_back(idx);
  }
  return pos;
}

std::optional<Vec2> place_in_region(const Disk& region, const std::vector<Disk>& fixed, double r, double margin) {
  double best = -std::numeric_limits<double>::infinity();
  Vec2 best_p = region.center;
  ring_sweep(region, r, std::max(r / 4, region.radius / 200), [&](const Vec2& p) {
    double c = region.radius - (p - region.center).norm() - r;
    for (const auto& f : fixed) c = std::min(c, (p - f.center).norm() - r - f.radius);
    if (c > best + 1e-12) {
      best = c;
      best_p = p;
    }
    return false;
  });
  if (!(best >= margin)) return std::nullopt;
  return best_p;
}

}  // namespace tempofleet::world
