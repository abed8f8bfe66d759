/******************************************************************************
 * @file admission/dag.hpp
 *
 * @brief Annotated dag of elemental functions. Vertices carry vector sizes,
 *        edges carry the run time of one scalar elemental tangent and adjoint
 *        evaluation plus whether the elemental Jacobian is known explicitly.
 ******************************************************************************/

#ifndef ADMISSION_DAG_HPP_
#define ADMISSION_DAG_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace admission {

//! Dimensionless cost unit shared by run-time estimates and fma counts.
using Cost = std::uint64_t;

struct DagVertex {
   //! User-facing index, may be negative and non-contiguous.
   int index {0};
   std::size_t vector_size {1};

   auto operator==(const DagVertex&) const -> bool = default;
};

//! Only affects the values drawn by the numeric verifier, never costs.
enum class JacobianKind { General, Identity };

struct DagEdge {
   int source {0};
   int target {0};
   Cost tangent_cost {0};
   Cost adjoint_cost {0};
   bool has_jacobian {false};
   JacobianKind jacobian_kind {JacobianKind::General};

   auto operator==(const DagEdge&) const -> bool = default;
};

/**
 * Immutable elemental-function graph. Construction checks local consistency
 * (positive sizes, unique indices and edges, known endpoints); acyclicity and
 * reachability are checked by validate_dag().
 */
class Dag {
 public:
   Dag() = default;
   Dag(std::vector<DagVertex> vertices, std::vector<DagEdge> edges);

   [[nodiscard]] auto vertices() const -> const std::vector<DagVertex>& {
      return m_vertices;
   }
   [[nodiscard]] auto edges() const -> const std::vector<DagEdge>& {
      return m_edges;
   }

   [[nodiscard]] auto contains(int index) const -> bool {
      return m_position.contains(index);
   }
   //! Dense position of a vertex index in vertices().
   [[nodiscard]] auto position(int index) const -> std::size_t;
   [[nodiscard]] auto vector_size(int index) const -> std::size_t;
   [[nodiscard]] auto find_edge(int source, int target) const
        -> std::optional<std::size_t>;

   //! Edge positions leaving / entering a vertex, in edges() order.
   [[nodiscard]] auto out_edges(int index) const
        -> const std::vector<std::size_t>&;
   [[nodiscard]] auto in_edges(int index) const
        -> const std::vector<std::size_t>&;

   //! Minimal vertices, ascending by index.
   [[nodiscard]] auto inputs() const -> std::vector<int>;
   //! Maximal vertices, ascending by index.
   [[nodiscard]] auto outputs() const -> std::vector<int>;

   /**
    * Kahn order; among ready vertices the smallest index goes first, so the
    * result is a function of the graph alone. Empty if the graph is cyclic.
    */
   [[nodiscard]] auto topological_order() const -> std::vector<int>;

   //! Structural equality, independent of vertex and edge listing order.
   [[nodiscard]] auto same_structure(const Dag& other) const -> bool;

 private:
   std::vector<DagVertex> m_vertices;
   std::vector<DagEdge> m_edges;
   std::unordered_map<int, std::size_t> m_position;
   std::vector<std::vector<std::size_t>> m_out;
   std::vector<std::vector<std::size_t>> m_in;
};

//! Throws CycleDetected or DanglingVertex.
auto validate_dag(const Dag& dag) -> void;

//! Reverses every edge and swaps its tangent and adjoint costs.
auto transpose_dag(const Dag& dag) -> Dag;

//! (sum of input sizes) * (sum of edge tangent costs)
auto dense_tangent_cost(const Dag& dag) -> Cost;
//! (sum of output sizes) * (sum of edge adjoint costs)
auto dense_adjoint_cost(const Dag& dag) -> Cost;

}  // namespace admission

#endif  // ADMISSION_DAG_HPP_
