#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tempofleet/world.hpp"

namespace tempofleet::control {

using world::Disk;
using world::Vec2;
using Mat2 = Eigen::Matrix2d;

class ControlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ControlParams {
  double k1 = 0.01;
  double k2 = 5.0;
  double k_phi = 1.0;
  double k_v = 1.0;
  double k_m = 0.01;
  double k_alpha = 0.01;
  double rbar = 0.1;
  double tau = 0.0;  // <= 0: min(rbar^2, rbar_d / 2, start clearance / 2)
  double m_hat0 = 0.5;
  double alpha_hat0 = 0.0;
  double m_cap = 100.0;
  double alpha_cap = 100.0;
  double dt = 1e-3;
  double timeout = 120.0;
  double arrive_speed = 1e-2;
  double fd_delta = 1e-6;
  double merge_gap = 1e-3;  // relative to the shrunk workspace radius
  int log_stride = 10;
};

ControlParams control_params_from_json(const nlohmann::json& j);
nlohmann::json control_params_to_json(const ControlParams& p);

/// Quintic smoothstep on [0, 1], clamped outside.
double smoothstep(double t);

/// Free space of one moving ball and its map onto the punctured unit disk.
/// The workspace is shrunk by the ball radius and rescaled to the unit disk;
/// each enlarged obstacle is then purged to its center by a radial map that
/// is the identity outside an annulus of width `width()`.
class FreeSpace {
 public:
  FreeSpace(const Disk& workspace, const std::vector<Disk>& obstacles, double entity_radius, double rbar,
            double merge_gap = 1e-3);

  const Disk& workspace() const { return workspace_; }
  double entity_radius() const { return radius_; }
  double scale() const { return scale_; }
  /// Enlarged obstacles after merging, world units.
  const std::vector<Disk>& obstacles() const { return merged_; }
  /// Enlarged obstacles before merging, world units.
  const std::vector<Disk>& enlarged() const { return enlarged_; }
  /// Obstacle points b_l in the unit disk.
  const std::vector<Vec2>& points() const { return points_; }
  double width() const { return width_; }
  /// Point-world clearance: |b_i - b_j| > 2 rbar, 1 - |b_i| > 2 rbar.
  double rbar() const { return rbar_; }

  bool contains(const Vec2& x) const;
  /// Smallest gap from the ball at x to the workspace edge or an enlarged obstacle.
  double clearance(const Vec2& x) const;

  std::optional<Vec2> try_transform(const Vec2& x, Mat2* jac = nullptr) const;
  Vec2 transform(const Vec2& x, Mat2* jac = nullptr) const;
  Vec2 inverse(const Vec2& chi) const;

 private:
  Disk workspace_;
  double radius_;
  double scale_;
  std::vector<Disk> enlarged_;
  std::vector<Disk> merged_;
  std::vector<Vec2> points_;
  std::vector<double> sizes_;  // normalized purged radii
  double width_ = 0.0;
  double rbar_ = 0.0;
};

struct Beta {
  double value;
  double d1;
  double d2;
};

/// beta(s) = 1 / smoothstep(s / tau) for s <= tau, 1 beyond.
Beta beta(double s, double tau);

struct PointWorld {
  std::vector<Vec2> points;
  double rbar = 0.0;
  Vec2 goal = Vec2::Zero();
  double rbar_d = 0.0;
};

PointWorld point_world(const FreeSpace& fs, const Vec2& goal_x);

class NavFn {
 public:
  /// Throws ControlError unless 0 < tau <= rbar^2 and tau < rbar_d.
  NavFn(PointWorld pw, double k1, double k2, double tau);

  const PointWorld& world() const { return pw_; }
  double tau() const { return tau_; }
  /// Shifted so the goal has value 0.
  double value(const Vec2& chi, Vec2* grad = nullptr) const;

 private:
  PointWorld pw_;
  double k1_, k2_, tau_;
};

/// Squared-distance clearance of chi from the boundary and every point.
double point_clearance(const PointWorld& pw, const Vec2& chi);
/// Explicit tau, or one that keeps the goal and `start_chi` outside every
/// influence zone.
double default_tau(const PointWorld& pw, const ControlParams& p, const std::optional<Vec2>& start_chi = std::nullopt);

struct Reference {
  Vec2 chi;
  Mat2 jac;
  Vec2 grad;  // of the navigation function at chi
  Vec2 v_d;
};

class Navigator {
 public:
  Navigator(FreeSpace fs, const Vec2& goal, const ControlParams& p, const std::optional<Vec2>& start = std::nullopt);

  const FreeSpace& space() const { return fs_; }
  const NavFn& navfn() const { return nf_; }
  const Vec2& goal() const { return goal_; }

  /// False when x is outside the free space.
  bool reference(const Vec2& x, Reference& out) const;
  Vec2 v_d(const Vec2& x) const;
  /// Directional difference of v_d along the velocity v.
  Vec2 v_d_dot(const Vec2& x, const Vec2& v, double delta) const;

 private:
  FreeSpace fs_;
  Vec2 goal_;
  NavFn nf_;
};

struct Estimates {
  double m_hat = 0.0;
  double alpha_hat = 0.0;
};

Vec2 navigation_force(const ControlParams& p, const Reference& ref, const Vec2& vd_dot, const Vec2& e_v,
                      const Estimates& est);
/// Time derivative of the estimates.
Estimates adaptation_rate(const ControlParams& p, const Vec2& e_v, const Vec2& vd_dot);
/// Per-robot shares cf_l * u; cf must be nonnegative and sum to one.
std::vector<Vec2> transport_forces(const std::vector<double>& cf, const Vec2& u);

/// True dynamics m xdd + sum_k f_k(x - offset_k, xd) = u, hidden from the controller.
struct Plant {
  struct Part {
    world::FrictionModel friction;
    Vec2 offset = Vec2::Zero();
  };
  double mass = 1.0;
  std::vector<Part> parts;

  Vec2 friction(const Vec2& x, const Vec2& v) const;
  double friction_bound() const;
};

struct SimState {
  Vec2 x = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  Estimates est;
};

/// One RK4 step of the plant under a constant force; estimates are untouched.
SimState integrate_step(const Plant& plant, const SimState& s, const Vec2& force, double dt);

struct MotionSpec {
  Disk workspace;
  std::vector<Disk> obstacles;  // raw, not enlarged
  double radius = 0.0;
  Plant plant;
  std::vector<double> cf;  // empty: single entity
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  Disk target;
};

struct Sample {
  double t = 0.0;
  Vec2 x, v, u;
  double m_hat = 0.0;
  double alpha_hat = 0.0;
  double clearance = 0.0;
  double e_v = 0.0;
  std::vector<Vec2> shares;
};

enum class Outcome { Arrived, Timeout, Collision, Diverged };

std::string outcome_name(Outcome o);

struct MotionResult {
  Outcome outcome = Outcome::Timeout;
  std::string message;
  double duration = 0.0;
  SimState final;
  double final_ev = 0.0;
  double min_clearance = 0.0;
  bool alpha_monotone = true;
  double max_m_hat = 0.0;
  double max_alpha_hat = 0.0;
  double rbar = 0.0;
  double tau = 0.0;
  std::size_t steps = 0;
  std::vector<Sample> log;

  bool ok() const { return outcome == Outcome::Arrived; }
};

/// Closed-loop run until the ball rests inside `target`, a collision, or the timeout.
MotionResult simulate(const MotionSpec& spec, const ControlParams& p);

/// Obstacles for one moving entity: workspace obstacles, every region except
/// `source` and `target`, and the frozen balls.
std::vector<Disk> motion_obstacles(const world::Scenario& s, int source, int target, const std::vector<Disk>& frozen);

void write_csv(std::ostream& os, const MotionResult& r);
/// Trajectory over the environment as a standalone SVG document.
std::string render_svg(const world::Scenario& s, const std::vector<Disk>& frozen,
                       const std::vector<const MotionResult*>& runs);

}  // namespace tempofleet::control
