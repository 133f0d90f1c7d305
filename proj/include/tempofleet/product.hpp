#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tempofleet/ltl.hpp"
#include "tempofleet/ts.hpp"

namespace tempofleet::product {

struct ProductState {
  int ts = 0;
  int nba = 0;
  friend bool operator==(const ProductState&, const ProductState&) = default;
};

struct ProductEdge {
  ProductState target;
  double cost;
  int ts_edge;  // index into TransitionSystem::successors(source.ts)
};

/// Lazy product of a TS with an NBA. An NBA edge q -> q' is enabled from
/// (s, q) when its label holds on L(s), the label of the source TS state.
class ProductSpace {
 public:
  ProductSpace(ts::TransitionSystem& tsys, const ltl::Nba& nba);

  ts::TransitionSystem& tsys() { return *ts_; }
  const ltl::Nba& nba() const { return *nba_; }

  std::vector<ProductState> initial() const;
  bool accepting(const ProductState& p) const { return nba_->accepting(p.nba); }
  void successors(const ProductState& p, std::vector<ProductEdge>& out);
  std::vector<ProductEdge> successors(const ProductState& p) {
    std::vector<ProductEdge> out;
    successors(p, out);
    return out;
  }

  std::int64_t key(const ProductState& p) const {
    return static_cast<std::int64_t>(p.ts) * static_cast<std::int64_t>(nba_->num_states()) + p.nba;
  }
  ProductState from_key(std::int64_t k) const;

 private:
  std::uint64_t letter_bits(int ts_state);

  ts::TransitionSystem* ts_;
  const ltl::Nba* nba_;
  std::vector<std::uint64_t> bits_;
  std::vector<char> have_bits_;
};

struct PlanStep {
  ts::TsState source;
  ts::TsState target;
  ts::ActionSet actions;
  double cost = 0.0;
};

struct Plan {
  std::vector<PlanStep> prefix;
  std::vector<PlanStep> suffix;
  double prefix_cost = 0.0;
  double suffix_cost = 0.0;
  double total_cost() const { return prefix_cost + suffix_cost; }
};

struct ExactOptions {
  std::size_t max_states = 2'000'000;  // product states touched per search
};

/// Shortest prefix to each accepting product state plus the shortest cycle
/// back to it; returns the cheapest combination. nullopt if infeasible.
/// Throws ts::BudgetExceeded when the product is too large.
std::optional<Plan> exact_plan(ts::TransitionSystem& tsys, const ltl::Nba& nba, const ExactOptions& opt = {});
std::optional<Plan> exact_plan(const world::Scenario& s, const ltl::Nba& nba, const ExactOptions& opt = {});

/// Lasso word of the plan's trace, one letter per step source.
ltl::LassoWord plan_word(const Plan& plan, const world::Scenario& s);

/// Checks chaining, that every step is a TS transition, and NBA acceptance.
bool verify_plan(const Plan& plan, const ltl::Nba& nba, const world::Scenario& s, std::string* why = nullptr);

/// Assembles a plan from product path edges (used by both planners).
Plan plan_from_path(ProductSpace& space, const std::vector<std::pair<ProductState, int>>& prefix,
                    const std::vector<std::pair<ProductState, int>>& suffix);

nlohmann::json state_to_json(const ts::TsState& st);
ts::TsState state_from_json(const nlohmann::json& j);
nlohmann::json plan_to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);

/// Step-numbered action table; suffix rows are starred.
std::string plan_table(const Plan& plan);

}  // namespace tempofleet::product
