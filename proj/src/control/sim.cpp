#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tempofleet/control.hpp"

namespace tempofleet::control {

namespace {

struct Field {
  const char* key;
  double ControlParams::*member;
};

constexpr Field kFields[] = {
    {"k1", &ControlParams::k1},
    {"k2", &ControlParams::k2},
    {"k_phi", &ControlParams::k_phi},
    {"k_v", &ControlParams::k_v},
    {"k_m", &ControlParams::k_m},
    {"k_alpha", &ControlParams::k_alpha},
    {"rbar", &ControlParams::rbar},
    {"tau", &ControlParams::tau},
    {"m_hat0", &ControlParams::m_hat0},
    {"alpha_hat0", &ControlParams::alpha_hat0},
    {"m_cap", &ControlParams::m_cap},
    {"alpha_cap", &ControlParams::alpha_cap},
    {"dt", &ControlParams::dt},
    {"timeout", &ControlParams::timeout},
    {"arrive_speed", &ControlParams::arrive_speed},
    {"fd_delta", &ControlParams::fd_delta},
    {"merge_gap", &ControlParams::merge_gap},
};

void check_params(const ControlParams& p) {
  for (double v : {p.k1, p.k2, p.k_phi, p.k_v, p.k_m, p.k_alpha, p.rbar, p.dt, p.timeout, p.arrive_speed, p.fd_delta,
                   p.m_cap, p.alpha_cap})
    if (!(v > 0.0) || !std::isfinite(v)) throw ControlError("control gains and step sizes must be positive");
  if (p.merge_gap < 0.0) throw ControlError("merge_gap must be nonnegative");
  if (p.m_hat0 < 0.0 || p.m_hat0 > p.m_cap || p.alpha_hat0 < 0.0 || p.alpha_hat0 > p.alpha_cap)
    throw ControlError("initial estimates must lie within their caps");
  if (p.log_stride < 1) throw ControlError("log_stride must be at least 1");
}

using State6 = Eigen::Matrix<double, 6, 1>;

State6 pack(const SimState& s) {
  State6 z;
  z << s.x, s.v, s.est.m_hat, s.est.alpha_hat;
  return z;
}

SimState unpack(const State6& z) { return {z.segment<2>(0), z.segment<2>(2), {z(4), z(5)}}; }

template <class Deriv>
std::optional<State6> rk4(const State6& z, double dt, Deriv&& f) {
  const auto k1 = f(z);
  if (!k1) return std::nullopt;
  const auto k2 = f(z + 0.5 * dt * *k1);
  if (!k2) return std::nullopt;
  const auto k3 = f(z + 0.5 * dt * *k2);
  if (!k3) return std::nullopt;
  const auto k4 = f(z + dt * *k3);
  if (!k4) return std::nullopt;
  return State6(z + dt / 6.0 * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4));
}

}  // namespace

ControlParams control_params_from_json(const nlohmann::json& j) {
  ControlParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ControlError("control block must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "log_stride") {
      p.log_stride = it->get<int>();
      continue;
    }
    bool known = false;
    for (const auto& f : kFields)
      if (it.key() == f.key) {
        p.*(f.member) = it->get<double>();
        known = true;
      }
    if (!known) throw ControlError("unknown control parameter '" + it.key() + "'");
  }
  check_params(p);
  return p;
}

nlohmann::json control_params_to_json(const ControlParams& p) {
  nlohmann::json j;
  for (const auto& f : kFields) j[f.key] = p.*(f.member);
  j["log_stride"] = p.log_stride;
  return j;
}

Vec2 Plant::friction(const Vec2& x, const Vec2& v) const {
  Vec2 f = Vec2::Zero();
  for (const auto& part : parts) f += part.friction.force(x - part.offset, v);
  return f;
}

double Plant::friction_bound() const {
  double a = 0.0;
  for (const auto& part : parts) a += part.friction.bound();
  return a;
}

SimState integrate_step(const Plant& plant, const SimState& s, const Vec2& force, double dt) {
  if (!(dt > 0.0)) throw ControlError("dt must be positive");
  auto f = [&](const State6& z) -> std::optional<State6> {
    State6 d = State6::Zero();
    d.segment<2>(0) = z.segment<2>(2);
    d.segment<2>(2) = (force - plant.friction(z.segment<2>(0), z.segment<2>(2))) / plant.mass;
    return d;
  };
  const State6 next = *rk4(pack(s), dt, f);
  if (!next.allFinite()) throw ControlError("integration produced a non-finite state");
  return unpack(next);
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Arrived: return "arrived";
    case Outcome::Timeout: return "timeout";
    case Outcome::Collision: return "collision";
    case Outcome::Diverged: return "diverged";
  }
  return "?";
}

MotionResult simulate(const MotionSpec& spec, const ControlParams& p) {
  check_params(p);
  if (!(spec.plant.mass > 0.0)) throw ControlError("mass must be positive");
  FreeSpace fs(spec.workspace, spec.obstacles, spec.radius, p.rbar, p.merge_gap);
  if (!fs.contains(spec.start)) throw ControlError("start is not in the free space");
  const Navigator nav(fs, spec.goal, p, spec.start);

  MotionResult res;
  res.rbar = fs.rbar();
  res.tau = nav.navfn().tau();

  auto clamp = [&](Estimates e) {
    e.m_hat = std::clamp(e.m_hat, 0.0, p.m_cap);
    e.alpha_hat = std::clamp(e.alpha_hat, 0.0, p.alpha_cap);
    return e;
  };

  struct Eval {
    Reference ref;
    Vec2 vd_dot, e_v, u;
    std::vector<Vec2> shares;
  };
  auto evaluate = [&](const SimState& st, Eval& ev) {
    if (!nav.reference(st.x, ev.ref)) return false;
    ev.vd_dot = nav.v_d_dot(st.x, st.v, p.fd_delta);
    ev.e_v = st.v - ev.ref.v_d;
    ev.u = navigation_force(p, ev.ref, ev.vd_dot, ev.e_v, clamp(st.est));
    if (!spec.cf.empty()) {
      ev.shares = transport_forces(spec.cf, ev.u);
      Vec2 sum = Vec2::Zero();
      for (const auto& s : ev.shares) sum += s;
      ev.u = sum;
    }
    return true;
  };
  auto deriv = [&](const State6& z) -> std::optional<State6> {
    const SimState st = unpack(z);
    Eval ev;
    if (!evaluate(st, ev)) return std::nullopt;
    const Estimates rate = adaptation_rate(p, ev.e_v, ev.vd_dot);
    State6 d;
    d << st.v, (ev.u - spec.plant.friction(st.x, st.v)) / spec.plant.mass, rate.m_hat, rate.alpha_hat;
    return d;
  };
  // Also waits for the velocity error to settle so the final e_v is small.
  auto arrived = [&](const SimState& st, const Eval& ev) {
    return (st.x - spec.target.center).norm() + spec.radius <= spec.target.radius && st.v.norm() < p.arrive_speed &&
           ev.e_v.norm() < p.arrive_speed;
  };
  auto record = [&](double t, const SimState& st, const Eval& ev) {
    Sample s;
    s.t = t;
    s.x = st.x;
    s.v = st.v;
    s.u = ev.u;
    s.m_hat = st.est.m_hat;
    s.alpha_hat = st.est.alpha_hat;
    s.clearance = fs.clearance(st.x);
    s.e_v = ev.e_v.norm();
    s.shares = ev.shares;
    res.log.push_back(std::move(s));
  };

  SimState st{spec.start, Vec2::Zero(), clamp({p.m_hat0, p.alpha_hat0})};
  res.min_clearance = fs.clearance(st.x);
  res.max_m_hat = st.est.m_hat;
  res.max_alpha_hat = st.est.alpha_hat;
  const auto n_steps = static_cast<std::size_t>(std::ceil(p.timeout / p.dt - 1e-9));
  Eval ev;
  std::size_t k = 0;
  res.outcome = Outcome::Timeout;
  for (;; ++k) {
    const double t = static_cast<double>(k) * p.dt;
    if (!evaluate(st, ev)) {
      res.outcome = Outcome::Collision;
      res.message = "left the free space";
      break;
    }
    const bool done = arrived(st, ev);
    if (done || k == n_steps || k % static_cast<std::size_t>(p.log_stride) == 0) record(t, st, ev);
    if (done) {
      res.outcome = Outcome::Arrived;
      break;
    }
    if (k == n_steps) {
      std::ostringstream m;
      m << "timeout after " << t << " s at distance " << (st.x - spec.goal).norm() << " from the goal";
      res.message = m.str();
      break;
    }
    const auto next = rk4(pack(st), p.dt, deriv);
    if (!next) {
      res.outcome = Outcome::Collision;
      res.message = "integration stage left the free space at t = " + std::to_string(t);
      break;
    }
    if (!next->allFinite()) {
      res.outcome = Outcome::Diverged;
      res.message = "non-finite state at t = " + std::to_string(t);
      break;
    }
    SimState nx = unpack(*next);
    nx.est = clamp(nx.est);
    if (nx.est.alpha_hat < st.est.alpha_hat) res.alpha_monotone = false;
    res.max_m_hat = std::max(res.max_m_hat, nx.est.m_hat);
    res.max_alpha_hat = std::max(res.max_alpha_hat, nx.est.alpha_hat);
    const double c = fs.clearance(nx.x);
    res.min_clearance = std::min(res.min_clearance, c);
    st = nx;
    if (c <= 0.0) {
      res.outcome = Outcome::Collision;
      res.message = "clearance " + std::to_string(c) + " at t = " + std::to_string(t + p.dt);
      ++k;
      break;
    }
  }
  res.steps = k;
  res.duration = static_cast<double>(k) * p.dt;
  res.final = st;
  Reference ref;
  res.final_ev = nav.reference(st.x, ref) ? (st.v - ref.v_d).norm() : std::numeric_limits<double>::infinity();
  return res;
}

std::vector<Disk> motion_obstacles(const world::Scenario& s, int source, int target, const std::vector<Disk>& frozen) {
  std::vector<Disk> out = s.obstacles;
  for (int k = 0; k < s.num_regions(); ++k)
    if (k != source && k != target) out.push_back(s.regions[static_cast<std::size_t>(k)].disk);
  out.insert(out.end(), frozen.begin(), frozen.end());
  return out;
}

void write_csv(std::ostream& os, const MotionResult& r) {
  const std::size_t n = r.log.empty() ? 0 : r.log.front().shares.size();
  os << "t,x,y,vx,vy,ux,uy,m_hat,alpha_hat,min_clearance";
  for (std::size_t i = 0; i < n; ++i) os << ",u" << i + 1 << "x,u" << i + 1 << "y";
  os << '\n' << std::setprecision(10);
  for (const auto& s : r.log) {
    os << s.t << ',' << s.x.x() << ',' << s.x.y() << ',' << s.v.x() << ',' << s.v.y() << ',' << s.u.x() << ','
       << s.u.y() << ',' << s.m_hat << ',' << s.alpha_hat << ',' << s.clearance;
    for (const auto& u : s.shares) os << ',' << u.x() << ',' << u.y();
    os << '\n';
  }
}

std::string render_svg(const world::Scenario& s, const std::vector<Disk>& frozen,
                       const std::vector<const MotionResult*>& runs) {
  const double size = 800.0;
  const double k = size / (2.0 * s.workspace.radius);
  const double x0 = s.workspace.center.x() - s.workspace.radius;
  const double y0 = s.workspace.center.y() + s.workspace.radius;
  auto px = [&](const Vec2& p) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << (p.x() - x0) * k << ',' << (y0 - p.y()) * k;
    return o.str();
  };
  auto circle = [&](std::ostringstream& o, const Disk& d, const char* style) {
    const std::string c = px(d.center);
    const auto comma = c.find(',');
    o << "<circle cx=\"" << c.substr(0, comma) << "\" cy=\"" << c.substr(comma + 1) << "\" r=\"" << d.radius * k
      << "\" " << style << "/>\n";
  };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  circle(o, s.workspace, "fill=\"white\" stroke=\"black\"");
  for (const auto& d : s.obstacles) circle(o, d, "fill=\"#888\"");
  for (const auto& r : s.regions) {
    circle(o, r.disk, "fill=\"#cde\" stroke=\"#47a\"");
    const std::string c = px(r.disk.center);
    const auto comma = c.find(',');
    o << "<text x=\"" << c.substr(0, comma) << "\" y=\"" << c.substr(comma + 1) << "\" font-size=\"12\">" << r.id
      << "</text>\n";
  }
  for (const auto& d : frozen) circle(o, d, "fill=\"#e94\"");
  static const char* colors[] = {"#c22", "#2a2", "#22c", "#a2a", "#2aa", "#aa2"};
  std::size_t idx = 0;
  for (const auto* r : runs) {
    o << "<polyline fill=\"none\" stroke=\"" << colors[idx++ % 6] << "\" points=\"";
    for (const auto& smp : r->log) o << px(smp.x) << ' ';
    o << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace tempofleet::control
