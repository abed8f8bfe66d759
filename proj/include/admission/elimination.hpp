/******************************************************************************
 * @file admission/elimination.hpp
 *
 * @brief Edge elimination (three fma flavors) and preaccumulation on a line
 *        dag, the plan artifact they produce, and plan replay. Classical face
 *        elimination is the special case where every Jacobian is present and
 *        only MUL is used.
 ******************************************************************************/

#ifndef ADMISSION_ELIMINATION_HPP_
#define ADMISSION_ELIMINATION_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "admission/dag.hpp"
#include "admission/line_dag.hpp"

namespace admission {

struct PlanStep {
   enum class Kind : std::uint8_t { Accumulate, Eliminate };

   Kind kind {Kind::Eliminate};
   Mode mode {Mode::Tangent};
   //! Vertex label for ACC, face label for ELI.
   PathLabel target;
   Cost cost {0};

   auto operator==(const PlanStep&) const -> bool = default;
};

struct Plan {
   std::vector<PlanStep> steps;

   [[nodiscard]] auto total_cost() const -> Cost;
   auto operator==(const Plan&) const -> bool = default;
};

//! "ACC TAN (0 1) 4"
auto render_step(const PlanStep& step) -> std::string;
//! One render_step() line per step, each terminated by '\n'.
auto render_plan(const Plan& plan) -> std::string;
//! Inverse of render_plan(); blank lines and '#' comments are skipped.
auto parse_plan(std::string_view text) -> Plan;

/**
 * Receives every algebraic effect of the engine, in execution order. The
 * numeric verifier implements it with concrete matrices.
 */
class EliminationObserver {
 public:
   virtual ~EliminationObserver() = default;

   //! New fill vertex, Jacobian initialized to zero.
   virtual auto on_fill(const LineDag& ld, VertexId fill) -> void = 0;
   //! target += (flavor of) right * left.
   virtual auto on_propagate(const LineDag& ld, VertexId target, VertexId left,
                             VertexId right, Mode mode) -> void = 0;
   //! Jacobian of an elemental made explicit.
   virtual auto on_preaccumulate(const LineDag& ld, VertexId v) -> void = 0;
   //! survivor += absorbed; absorbed is removed right after.
   virtual auto on_merge(const LineDag& ld, VertexId survivor,
                         VertexId absorbed) -> void = 0;
};

//! TAN: n_source(left) * tangent(right); ADJ: n_sink(right) * adjoint(left);
//! MUL: n_source(left) * n_pivot * n_sink(right).
auto elimination_cost(const LineDag& ld, VertexId left, VertexId right,
                      Mode mode) -> Cost;

//! Whether mode's prerequisites hold right now (no preaccumulation).
auto is_eliminatable(const LineDag& ld, VertexId left, VertexId right,
                     Mode mode) -> bool;

/**
 * Eliminates the intermediate edge (left, right): fill (or absorb into an
 * existing vertex with identical neighborhoods and a present Jacobian),
 * accumulate, remove the edge, then remove or merge left and right in that
 * order. Returns the step cost. Throws NoSuchEdge or NotEliminatable.
 */
auto eliminate_edge(LineDag& ld, VertexId left, VertexId right, Mode mode,
                    EliminationObserver* observer = nullptr) -> Cost;

enum class PreaccumulationMode : std::uint8_t { Tangent, Adjoint, Auto };

auto preaccumulation_cost(const LineDag& ld, VertexId v, Mode mode) -> Cost;

/**
 * Makes the Jacobian of an elemental explicit, then merges any coexisting
 * vertex with identical neighborhoods into it. Auto picks the cheaper
 * flavor, tangent on ties. Throws NotElemental or AlreadyAccumulated.
 */
auto preaccumulate(LineDag& ld, VertexId v, PreaccumulationMode mode,
                   EliminationObserver* observer = nullptr)
     -> std::pair<Mode, Cost>;

//! Cost of an action in the current state (preaccumulations included).
auto action_cost(const LineDag& ld, const Action& action) -> Cost;

/**
 * Executes an action, appending its ACC/ELI steps to `plan` when given.
 * Returns the summed cost of those steps.
 */
auto apply_action(LineDag& ld, const Action& action, Plan* plan = nullptr,
                  EliminationObserver* observer = nullptr) -> Cost;

struct ReplayResult {
   Cost total_cost {0};
   LineDag final_state;
   bool complete {false};
};

/**
 * Executes a plan step by step from the line dag of `dag`. Every recorded
 * step cost must match the recomputed one. Throws StepInapplicable or
 * CostMismatch, both carrying the step index.
 */
auto replay_sequence(const Dag& dag, const Plan& plan,
                     EliminationObserver* observer = nullptr) -> ReplayResult;
auto replay_sequence(LineDag initial, const Plan& plan,
                     EliminationObserver* observer = nullptr) -> ReplayResult;

}  // namespace admission

#endif  // ADMISSION_ELIMINATION_HPP_
