#ifndef ADMISSION_CHAIN_DP_HPP_
#define ADMISSION_CHAIN_DP_HPP_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "admission/dag.hpp"
#include "admission/elimination.hpp"

namespace admission {

/**
 * F = F_q o ... o F_1 with F_l : R^{d_{l-1}} -> R^{d_l}. Elemental l sits
 * between chain vertices l-1 and l.
 */
struct ChainSpec {
   //! d_0 .. d_q
   std::vector<std::size_t> dims;
   //! T_1 .. T_q and A_1 .. A_q
   std::vector<Cost> tangent_costs;
   std::vector<Cost> adjoint_costs;
   //! Dag vertex index of each chain vertex; empty means 0 .. q.
   std::vector<int> indices;

   [[nodiscard]] auto q() const -> std::size_t {
      return tangent_costs.size();
   }
   [[nodiscard]] auto index(std::size_t vertex) const -> int {
      return indices.empty() ? static_cast<int>(vertex) : indices[vertex];
   }
};

//! Throws InvalidDag unless sizes agree, q >= 1 and all dims are positive.
auto validate_chain(const ChainSpec& spec) -> void;

/**
 * How the Jacobian of the subchain F_last o ... o F_first (1-based) is
 * obtained:
 *  - TangentSweep / AdjointSweep: one tangent (adjoint) pass through the
 *    whole subchain, seeded with the identity,
 *  - Product: both halves accumulated, then multiplied,
 *  - TangentPropagate: prefix [first, split] accumulated, then pushed
 *    through the remaining elemental tangents,
 *  - AdjointPropagate: suffix [split + 1, last] accumulated, then pulled
 *    through the preceding elemental adjoints.
 */
struct ChainStrategy {
   enum class Kind {
      TangentSweep,
      AdjointSweep,
      Product,
      TangentPropagate,
      AdjointPropagate
   };

   Kind kind {Kind::TangentSweep};
   std::size_t first {1};
   std::size_t last {1};
   std::size_t split {0};
   //! Product: both; TangentPropagate: left; AdjointPropagate: right.
   std::shared_ptr<const ChainStrategy> left;
   std::shared_ptr<const ChainStrategy> right;
};

using ChainStrategyPtr = std::shared_ptr<const ChainStrategy>;

auto strategy_cost(const ChainSpec& spec, const ChainStrategy& strategy)
     -> Cost;

//! e.g. "mul(adj[1], tan[2])", "tanprop(adj[1]; [2..3])"
auto render_strategy(const ChainStrategy& strategy) -> std::string;

//! Elimination sequence on chain_as_dag(spec) realizing the strategy.
auto strategy_plan(const ChainSpec& spec, const ChainStrategy& strategy)
     -> Plan;

struct ChainOptimum {
   Cost cost {0};
   ChainStrategyPtr strategy;
};

/**
 * Dynamic program over subchains [i, j]:
 *   C(i,i) = min(d_{i-1} T_i, d_i A_i)
 *   C(i,j) = min of the two sweeps over [i, j] and, for every split k,
 *            C(i,k) + C(k+1,j) + d_{i-1} d_k d_j,
 *            C(i,k) + d_{i-1} (T_{k+1} + ... + T_j),
 *            C(k+1,j) + d_j (A_i + ... + A_k).
 * Ties keep the first candidate in that order (tangent before adjoint,
 * smaller split first).
 */
auto optimize_chain(const ChainSpec& spec) -> ChainOptimum;

constexpr std::size_t max_enumerated_chain = 6;

/**
 * Every distinct strategy with its cost. Propagation never continues a
 * strategy of the same direction (that would be a longer sweep or a
 * different split of the same propagation), so each strategy is listed
 * once. Throws ChainTooLong for q > max_enumerated_chain.
 */
auto enumerate_chain_strategies(const ChainSpec& spec)
     -> std::vector<std::pair<ChainStrategyPtr, Cost>>;

//! Single-path dag 0 -> 1 -> ... -> q, no explicit Jacobians.
auto chain_as_dag(const ChainSpec& spec) -> Dag;

//! Inverse of chain_as_dag(); throws InvalidDag unless the dag is one path.
auto chain_from_dag(const Dag& dag) -> ChainSpec;

//! Dims and costs reversed, tangent and adjoint swapped.
auto reverse_chain(const ChainSpec& spec) -> ChainSpec;

/**
 * Four lines: q, then d_0 .. d_q, then T_1 .. T_q, then A_1 .. A_q.
 * Blank lines and '#' comments are ignored. Throws ParseError.
 */
auto parse_chain_spec(std::string_view text) -> ChainSpec;

}  // namespace admission

#endif  // ADMISSION_CHAIN_DP_HPP_
