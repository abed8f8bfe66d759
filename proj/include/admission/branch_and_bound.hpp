/******************************************************************************
 * @file admission/branch_and_bound.hpp
 *
 * @brief Anytime branch and bound for minimal-cost complete generalized face
 *        elimination. Depth-first over fused actions, pruning with an
 *        admissible per-pivot lower bound against a greedy-seeded incumbent,
 *        plus two optimality-preserving compressions: independent actions are
 *        only taken in increasing action order, and preaccumulation only
 *        happens fused right before an incident elimination (or as the final
 *        step for an elemental without intermediate neighbors).
 ******************************************************************************/

#ifndef ADMISSION_BRANCH_AND_BOUND_HPP_
#define ADMISSION_BRANCH_AND_BOUND_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "admission/dag.hpp"
#include "admission/elimination.hpp"
#include "admission/line_dag.hpp"
#include "admission/report.hpp"

namespace admission {

struct SearchNode {
   LineDag state;
   Plan partial_plan;
   Cost cost_so_far {0};
};

//! Per-pivot bound table of a dag, reusable across nodes.
class LowerBound {
 public:
   explicit LowerBound(const Dag& dag);

   /**
    * cost_so_far plus a per-pivot term for every original vertex that still
    * has an intermediate edge through it. Sources entering the pivot must
    * each be served by an elimination at the pivot whose left endpoint
    * starts at that source or an ancestor of it; sinks leaving it likewise
    * through themselves or a descendant. Summing the cheapest single
    * elimination over sources with pairwise disjoint ancestor closures (or
    * sinks with disjoint descendant closures) and taking the larger side
    * never exceeds what any completion spends at that pivot. Dimensions are
    * minimized over the closures; TAN and ADJ only count while a matching
    * elemental model is still available. Elementals joining an input to an
    * output directly add their unavoidable preaccumulation.
    */
   [[nodiscard]] auto operator()(const LineDag& state, Cost cost_so_far) const
        -> Cost;

 private:
   struct PivotData {
      //! Over strict ancestors / strict descendants.
      Cost min_source_size {0};
      Cost min_sink_size {0};
      //! Over ancestors / descendants including the vertex itself.
      Cost min_above_or_self {0};
      Cost min_below_or_self {0};
      Cost pivot_size {0};
   };

   [[nodiscard]] auto overlap(std::size_t a, std::size_t b, bool upward) const
        -> bool;
   [[nodiscard]] auto packing(
        const std::vector<std::pair<std::size_t, Cost>>& items,
        bool upward) const -> Cost;

   std::vector<PivotData> m_pivots;  // by Dag::position()
   //! m_reach[a][b]: b reachable from a (reflexive), by position.
   std::vector<std::vector<char>> m_reach;
   const Dag* m_dag;
};

auto lower_bound(const SearchNode& node) -> Cost;

//! Greedy completion of node.state; node cost plus its cost is an incumbent
//! candidate.
auto upper_bound_completion(const SearchNode& node) -> Plan;

struct BranchAndBoundOptions {
   std::optional<double> time_limit_s;
   std::size_t workers {1};
   //! 0 keeps the fixed action order; other values shuffle siblings with
   //! equal lower bound, deterministically per seed.
   std::uint64_t seed {0};
   //! Independent-action compression; off only for testing.
   bool compress_independent {true};
   //! Nodes deeper than this skip the greedy upper bound.
   std::size_t upper_bound_depth {2};
   //! Prune with the lower bound; without it only cost_so_far is compared
   //! against the incumbent (exhaustive reference search).
   bool use_lower_bound {true};
   //! Maximum number of distinct states remembered for duplicate detection;
   //! 0 disables it.
   std::size_t memo_limit {1U << 20U};
};

auto solve_branch_and_bound(const Dag& dag,
                            const BranchAndBoundOptions& options = {})
     -> PlanReport;

}  // namespace admission

#endif  // ADMISSION_BRANCH_AND_BOUND_HPP_
