// tempofleet: translate, build-ts, plan, simulate, verify.
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tempofleet/executor.hpp"
#include "tempofleet/planner.hpp"

using namespace tempofleet;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kError = 1, kParse = 2, kInfeasible = 3, kBudget = 4, kSimulation = 5 };

struct Failure : std::runtime_error {
  Failure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

struct Options {
  std::string scenario;
  std::vector<std::string> formulas;
  std::string mode = "exact";
  std::size_t n_max = 10000;
  std::uint64_t seed = 1;
  double bias = 0.3;
  unsigned jobs = 1;
  std::optional<double> dt;
  std::optional<double> timeout;
  int suffix_reps = 2;
  std::string out;
  bool plot = false;
  std::size_t max_states = 2'000'000;
  std::string plan_file;
  std::string report_file;
};

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw Failure(kError, "cannot write " + p.string());
  os << text;
  spdlog::info("wrote {}", p.string());
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure(kParse, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Failure(kParse, path + ": " + e.what());
  }
}

world::Scenario scenario_of(const Options& o) {
  if (o.scenario.empty()) throw Failure(kParse, "--scenario is required");
  auto s = world::load_scenario(o.scenario);
  const auto params = control::control_params_from_json(s.control);
  for (const auto& w : world::validate_scenario(s, params.k_phi)) spdlog::warn("{}", w);
  return s;
}

executor::Tasks tasks_of(const Options& o, const world::Scenario& s) {
  if (o.formulas.empty()) throw Failure(kParse, "at least one --formula is required");
  return executor::parse_tasks(o.formulas, s);
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int cmd_translate(const Options& o) {
  ltl::Formula f = ltl::Formula::tt();
  if (!o.scenario.empty()) {
    f = tasks_of(o, scenario_of(o)).combined();
  } else {
    if (o.formulas.empty()) throw Failure(kParse, "at least one --formula is required");
    for (std::size_t k = 0; k < o.formulas.size(); ++k) {
      const auto g = ltl::parse_ltl(o.formulas[k]);
      f = k == 0 ? g : ltl::Formula::conj(f, g);
    }
  }
  const auto t0 = Clock::now();
  const auto nba = ltl::translate(f);
  std::cout << "formula: " << f.str() << "\n"
            << "states: " << nba.num_states() << "\n"
            << "transitions: " << nba.num_edges() << "\n"
            << "seconds: " << seconds_since(t0) << "\n";
  if (!o.out.empty()) write_file(fs::path(o.out) / "nba.txt", nba.to_text());
  return kOk;
}

int cmd_build_ts(const Options& o) {
  const auto s = scenario_of(o);
  const auto t0 = Clock::now();
  const auto built = ts::build_ts(s, o.max_states);
  std::cout << "states: " << built.states.size() << "\n"
            << "transitions: " << built.num_transitions << "\n"
            << "seconds: " << seconds_since(t0) << "\n";
  if (!o.out.empty()) write_file(fs::path(o.out) / "ts.txt", ts::export_ts(built));
  return kOk;
}

product::Plan make_plan(const Options& o, const world::Scenario& s, const ltl::Nba& nba) {
  const auto t0 = Clock::now();
  std::optional<product::Plan> plan;
  if (o.mode == "exact") {
    product::ExactOptions eo;
    eo.max_states = o.max_states;
    plan = product::exact_plan(s, nba, eo);
    if (!plan) throw Failure(kInfeasible, "infeasible: no accepting lasso in the product");
  } else if (o.mode == "sampling") {
    planner::PlannerParams pp;
    pp.n_max = o.n_max;
    pp.seed = o.seed;
    pp.bias = o.bias;
    pp.jobs = o.jobs;
    plan = planner::plan_sampling(s, nba, pp);
    // The trees only cover part of the product, so this is not a proof of infeasibility.
    if (!plan) throw Failure(kBudget, "no plan within n_max = " + std::to_string(o.n_max) + " (try --mode exact)");
  } else {
    throw Failure(kParse, "unknown --mode " + o.mode);
  }
  spdlog::info("planned in {:.3f} s", seconds_since(t0));
  std::string why;
  if (!product::verify_plan(*plan, nba, s, &why)) throw Failure(kError, "plan failed verification: " + why);
  return *plan;
}

int cmd_plan(const Options& o) {
  const auto s = scenario_of(o);
  const auto nba = ltl::translate(tasks_of(o, s).combined());
  spdlog::info("automaton: {} states, {} transitions", nba.num_states(), nba.num_edges());
  const auto plan = make_plan(o, s, nba);
  std::cout << product::plan_table(plan);
  if (!o.out.empty()) write_file(fs::path(o.out) / "plan.json", product::plan_to_json(plan).dump(2));
  return kOk;
}

int cmd_simulate(const Options& o) {
  const auto s = scenario_of(o);
  const auto tasks = tasks_of(o, s);
  const auto nba = ltl::translate(tasks.combined());
  product::Plan plan;
  if (!o.plan_file.empty()) {
    plan = product::plan_from_json(read_json(o.plan_file));
    std::string why;
    if (!product::verify_plan(plan, nba, s, &why)) throw Failure(kError, "plan failed verification: " + why);
  } else {
    plan = make_plan(o, s, nba);
  }
  executor::ExecOptions eo;
  eo.control = control::control_params_from_json(s.control);
  if (o.dt) eo.control.dt = *o.dt;
  if (o.timeout) eo.control.timeout = *o.timeout;
  eo.suffix_reps = o.suffix_reps;
  const auto t0 = Clock::now();
  const auto rep = executor::execute_plan(plan, s, eo);
  spdlog::info("executed {} motions in {:.1f} s wall, {:.1f} s simulated", rep.motions.size(), seconds_since(t0),
               rep.total_time);
  std::string why;
  const bool verified = rep.ok && executor::verify_behavior(rep, tasks, &why);

  if (!o.out.empty()) {
    const fs::path dir(o.out);
    auto j = executor::report_to_json(rep);
    j["verified"] = verified;
    write_file(dir / "report.json", j.dump(2));
    for (std::size_t k = 0; k < rep.motions.size(); ++k) {
      std::ostringstream csv;
      control::write_csv(csv, rep.motions[k].result);
      write_file(dir / ("motion_" + std::to_string(k + 1) + ".csv"), csv.str());
    }
    if (o.plot) {
      std::vector<const control::MotionResult*> runs;
      for (const auto& m : rep.motions) runs.push_back(&m.result);
      write_file(dir / "trajectories.svg", control::render_svg(s, {}, runs));
    }
  }
  std::cout << "motions: " << rep.motions.size() << "\n"
            << "simulated_time: " << rep.total_time << "\n"
            << "min_clearance: " << rep.min_clearance() << "\n"
            << "relocations: " << rep.relocations << "\n";
  if (!rep.ok) throw Failure(kSimulation, rep.error);
  std::cout << "verified: " << (verified ? "true" : "false") << "\n";
  if (!verified) throw Failure(kError, "behavior does not satisfy the task: " + why);
  return kOk;
}

int cmd_verify(const Options& o) {
  const auto s = scenario_of(o);
  const auto tasks = tasks_of(o, s);
  if (o.plan_file.empty() && o.report_file.empty()) throw Failure(kParse, "give --plan and/or --report");
  bool ok = true;
  if (!o.plan_file.empty()) {
    std::string why;
    const bool v = product::verify_plan(product::plan_from_json(read_json(o.plan_file)),
                                        ltl::translate(tasks.combined()), s, &why);
    std::cout << "plan: " << (v ? "true" : "false " + why) << "\n";
    ok = ok && v;
  }
  if (!o.report_file.empty()) {
    std::string why;
    const bool v = executor::verify_behavior(executor::report_from_json(read_json(o.report_file)), tasks, &why);
    std::cout << "behavior: " << (v ? "true" : "false " + why) << "\n";
    ok = ok && v;
  }
  return ok ? kOk : kError;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("tempofleet");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("TEMPOFLEET_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Multi-robot LTL planning with object transport"};
  app.require_subcommand(1);
  Options o;

  auto scenario = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option("--scenario", o.scenario, "Scenario JSON file");
    if (required) opt->required();
  };
  auto formula = [&](CLI::App* c) {
    c->add_option("--formula", o.formulas, "Task formula; prefix with r<i>: or o<j>: for a per-entity task")
        ->take_all();
  };
  auto planning = [&](CLI::App* c) {
    c->add_option("--mode", o.mode, "exact | sampling")->check(CLI::IsMember({"exact", "sampling"}));
    c->add_option("--n-max", o.n_max, "Sampling iterations per tree");
    c->add_option("--seed", o.seed, "Sampling seed");
    c->add_option("--bias", o.bias, "Probability of expanding the newest node")->check(CLI::Range(0.0, 1.0));
    c->add_option("--jobs", o.jobs, "Suffix-tree workers");
    c->add_option("--max-states", o.max_states, "Exploration budget");
  };
  auto out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output directory"); };

  auto* tr = app.add_subcommand("translate", "Translate a formula to a Buchi automaton");
  scenario(tr, false);
  formula(tr);
  out(tr);
  auto* bt = app.add_subcommand("build-ts", "Enumerate the reachable transition system");
  scenario(bt, true);
  bt->add_option("--max-states", o.max_states, "Exploration budget");
  out(bt);
  auto* pl = app.add_subcommand("plan", "Synthesize a prefix-suffix plan");
  scenario(pl, true);
  formula(pl);
  planning(pl);
  out(pl);
  auto* sim = app.add_subcommand("simulate", "Execute a plan with the continuous controllers");
  scenario(sim, true);
  formula(sim);
  planning(sim);
  sim->add_option("--plan", o.plan_file, "Plan JSON (planned on the fly otherwise)");
  sim->add_option("--dt", o.dt, "Integration step")->check(CLI::PositiveNumber);
  sim->add_option("--timeout", o.timeout, "Per-motion time budget")->check(CLI::PositiveNumber);
  sim->add_option("--suffix-reps", o.suffix_reps, "Suffix laps to execute")->check(CLI::PositiveNumber);
  sim->add_flag("--plot", o.plot, "Also write trajectories.svg");
  out(sim);
  auto* ver = app.add_subcommand("verify", "Check a plan or an executed behavior against the tasks");
  scenario(ver, true);
  formula(ver);
  ver->add_option("--plan", o.plan_file, "Plan JSON");
  ver->add_option("--report", o.report_file, "report.json from simulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*tr) return cmd_translate(o);
    if (*bt) return cmd_build_ts(o);
    if (*pl) return cmd_plan(o);
    if (*sim) return cmd_simulate(o);
    if (*ver) return cmd_verify(o);
  } catch (const Failure& f) {
    spdlog::error("{}", f.what());
    return f.code;
  } catch (const ltl::ParseError& e) {
    spdlog::error("formula: {}", e.what());
    return kParse;
  } catch (const ltl::UnknownAtomError& e) {
    spdlog::error("formula: {}", e.what());
    return kParse;
  } catch (const world::ScenarioError& e) {
    spdlog::error("scenario: {}", e.what());
    return kParse;
  } catch (const ts::BudgetExceeded& e) {
    spdlog::error("{}", e.what());
    return kBudget;
  } catch (const executor::ExecutionError& e) {
    spdlog::error("{}", e.what());
    return kSimulation;
  } catch (const control::ControlError& e) {
    spdlog::error("{}", e.what());
    return kSimulation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kError;
  }
  return kError;
}
