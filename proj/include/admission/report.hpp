#ifndef ADMISSION_REPORT_HPP_
#define ADMISSION_REPORT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "admission/dag.hpp"
#include "admission/elimination.hpp"

namespace admission {

struct SearchStats {
   std::size_t nodes_generated {0};
   std::size_t nodes_visited {0};
   std::size_t nodes_pruned {0};
   Cost incumbent_cost {0};
   bool proven_optimal {false};
   double elapsed_s {0.0};
   //! (seconds since start, cost) for every incumbent improvement.
   std::vector<std::pair<double, Cost>> incumbent_history;
};

//! Outcome of one planning method on one dag.
struct PlanReport {
   std::string method;
   Cost dense_tangent_cost {0};
   Cost dense_adjoint_cost {0};
   //! Absent for the dense reporters, which are not elimination sequences.
   std::optional<Plan> plan;
   Cost total_cost {0};
   bool optimal {false};
   std::optional<SearchStats> stats;
   //! Rendered chain strategy, set by the chain dynamic program.
   std::optional<std::string> chain_strategy;
   double elapsed_s {0.0};
};

}  // namespace admission

#endif  // ADMISSION_REPORT_HPP_
