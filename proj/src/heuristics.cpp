#include "admission/heuristics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace admission {

namespace {

enum class Direction { Forward, Reverse };

auto sparse_sweep(const Dag& dag, Direction direction) -> Plan {
   const Mode mode =
        direction == Direction::Forward ? Mode::Tangent : Mode::Adjoint;
   const auto preacc_mode = direction == Direction::Forward
                                 ? PreaccumulationMode::Tangent
                                 : PreaccumulationMode::Adjoint;

   LineDag ld = build_line_dag(dag);
   Plan plan;

   auto accumulate = [&](VertexId v) {
      PathLabel label = ld.vertex(v).label;
      const auto [m, cost] = preaccumulate(ld, v, preacc_mode);
      plan.steps.push_back(
           {PlanStep::Kind::Accumulate, m, std::move(label), cost});
   };

   // Seed: elementals touching an input (forward) or an output (reverse).
   const auto boundary = direction == Direction::Forward ? ld.inputs()
                                                         : ld.outputs();
   std::vector<VertexId> seeds;
   for (const VertexId b : boundary) {
      const LineVertex& bv = ld.vertex(b);
      const auto& adjacent =
           direction == Direction::Forward ? bv.succs : bv.preds;
      for (const VertexId v : adjacent) {
         if (ld.vertex(v).elemental && !ld.vertex(v).jacobian_present) {
            seeds.push_back(v);
         }
      }
   }
   std::ranges::sort(seeds, {}, [&](VertexId v) { return ld.vertex(v).label; });
   seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
   for (const VertexId v : seeds) {
      if (ld.vertex(v).is_intermediate() && !ld.vertex(v).jacobian_present) {
         accumulate(v);
      }
   }

   std::unordered_map<int, std::size_t> rank;
   const auto order = dag.topological_order();
   for (std::size_t k = 0; k < order.size(); ++k) {
      rank[order[k]] =
           direction == Direction::Forward ? k : order.size() - 1 - k;
   }

   for (;;) {
      const auto edges = ld.intermediate_edges();
      if (edges.empty()) {
         break;
      }
      using Key = std::tuple<std::size_t, PathLabel>;
      auto key = [&](const std::pair<VertexId, VertexId>& e) -> Key {
         const Action a {Action::Kind::Eliminate, mode, e.first, e.second};
         return {rank.at(ld.vertex(e.first).sink()), action_label(ld, a)};
      };
      const auto next = *std::ranges::min_element(
           edges, [&](const auto& a, const auto& b) { return key(a) < key(b); });

      if (!is_eliminatable(ld, next.first, next.second, mode)) {
         throw std::logic_error("sparse sweep reached a non-eliminatable edge");
      }
      PathLabel face = action_label(
           ld, {Action::Kind::Eliminate, mode, next.first, next.second});
      const Cost cost = eliminate_edge(ld, next.first, next.second, mode);
      plan.steps.push_back(
           {PlanStep::Kind::Eliminate, mode, std::move(face), cost});
   }

   for (const VertexId v : ld.intermediates()) {
      if (ld.vertex(v).is_intermediate() && !ld.vertex(v).jacobian_present) {
         accumulate(v);
      }
   }
   return plan;
}

auto mode_rank(Mode mode) -> int {
   return static_cast<int>(mode);
}

}  // namespace

auto plan_sparse_tangent(const Dag& dag) -> Plan {
   return sparse_sweep(dag, Direction::Forward);
}

auto plan_sparse_adjoint(const Dag& dag) -> Plan {
   return sparse_sweep(dag, Direction::Reverse);
}

auto greedy_completion(LineDag& ld, Plan* plan) -> Cost {
   Cost total = 0;
   for (;;) {
      const auto actions = eliminatable_targets(ld);
      if (actions.empty()) {
         break;
      }

      const auto before = static_cast<long long>(ld.intermediate_count());
      using Score = std::tuple<long long, Cost, int, PathLabel>;
      std::optional<Score> best_score;
      std::size_t best = 0;
      for (std::size_t k = 0; k < actions.size(); ++k) {
         LineDag trial = ld;
         const Cost cost = apply_action(trial, actions[k]);
         const auto fill =
              static_cast<long long>(trial.intermediate_count()) - before;
         Score score {fill, cost, mode_rank(actions[k].mode),
                      action_label(ld, actions[k])};
         if (!best_score || score < *best_score) {
            best_score = std::move(score);
            best = k;
         }
      }
      total += apply_action(ld, actions[best], plan);
   }
   return total;
}

auto plan_greedy_min_fill(const Dag& dag) -> Plan {
   LineDag ld = build_line_dag(dag);
   Plan plan;
   greedy_completion(ld, &plan);
   return plan;
}

}  // namespace admission
