/******************************************************************************
 * @file admission/numeric.hpp
 *
 * @brief Numeric certification of elimination plans. Elemental Jacobians are
 *        drawn at random, the plan is executed as matrix algebra alongside
 *        the structural replay, and the resulting blocks are compared with
 *        plain forward propagation of the chain rule.
 ******************************************************************************/

#ifndef ADMISSION_NUMERIC_HPP_
#define ADMISSION_NUMERIC_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "admission/dag.hpp"
#include "admission/elimination.hpp"

namespace admission {

using Matrix = Eigen::MatrixXd;

//! (source, target) of an original edge, or (input, output) of a block.
using VertexPair = std::pair<int, int>;

struct NumericInstance {
   //! n_target x n_source per original edge.
   std::map<VertexPair, Matrix> jacobians;
   std::uint64_t seed {0};
};

struct JacobianResult {
   //! n_output x n_input for every (input, output) pair, zero when no path
   //! connects them.
   std::map<VertexPair, Matrix> blocks;
};

//! Entries uniform in [-1, 1] from a generator seeded with `seed`, edges in
//! dag order; identity-kind edges get the identity.
auto instantiate_numeric(const Dag& dag, std::uint64_t seed) -> NumericInstance;

//! Forward propagation dv/dx = sum over in-edges F'(u,v) du/dx, one input at
//! a time, in topological order.
auto reference_jacobian(const Dag& dag, const NumericInstance& instance)
     -> JacobianResult;

struct NumericOptions {
   //! Multiplies the operands of the n-th MUL (0-based) in the wrong order;
   //! only for exercising the verifier.
   std::optional<std::size_t> swap_multiply;
};

/**
 * Replays `plan` while keeping a matrix per line-dag vertex: TAN applies the
 * right elemental to the left Jacobian, ADJ applies the left elemental to the
 * right Jacobian, MUL multiplies both Jacobians, merges add. Throws
 * StepInapplicable / CostMismatch from the replay and IncompletePlan if the
 * final state is not complete.
 */
auto execute_sequence_numeric(const Dag& dag, const NumericInstance& instance,
                              const Plan& plan,
                              const NumericOptions& options = {})
     -> JacobianResult;

//! Largest blockwise Frobenius error, relative to the reference block (or
//! absolute where the reference block vanishes).
auto max_relative_error(const JacobianResult& computed,
                        const JacobianResult& reference) -> double;

constexpr double verification_tolerance = 1e-8;

struct Verdict {
   bool pass {false};
   std::size_t trials {0};
   double worst_error {0.0};
   std::uint64_t worst_seed {0};
   //! Set when the plan could not be executed at all.
   std::string failure;
};

//! Seeds first_seed .. first_seed + trials - 1.
auto verify_plan(const Dag& dag, const Plan& plan, std::size_t trials,
                 std::uint64_t first_seed = 1,
                 const NumericOptions& options = {}) -> Verdict;

}  // namespace admission

#endif  // ADMISSION_NUMERIC_HPP_
