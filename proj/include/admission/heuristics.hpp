#ifndef ADMISSION_HEURISTICS_HPP_
#define ADMISSION_HEURISTICS_HPP_

#include "admission/dag.hpp"
#include "admission/elimination.hpp"
#include "admission/line_dag.hpp"

namespace admission {

/**
 * Preaccumulates (tangent) every elemental leaving an input, then eliminates
 * intermediate edges in tangent mode in topological order of the pivot,
 * ties broken by face label.
 */
auto plan_sparse_tangent(const Dag& dag) -> Plan;

//! Mirror image of plan_sparse_tangent(): adjoint preaccumulation of the
//! elementals entering an output, adjoint eliminations in reverse order.
auto plan_sparse_adjoint(const Dag& dag) -> Plan;

/**
 * Repeatedly takes the action with the smallest change in the number of
 * intermediate vertices (fill counts +1, removals and merges -1). Ties go to
 * the cheaper action, then TAN before ADJ before MUL, then the smaller label.
 */
auto plan_greedy_min_fill(const Dag& dag) -> Plan;

//! Greedy completion of an arbitrary state; appends to `plan`, returns cost.
auto greedy_completion(LineDag& ld, Plan* plan = nullptr) -> Cost;

}  // namespace admission

#endif  // ADMISSION_HEURISTICS_HPP_
