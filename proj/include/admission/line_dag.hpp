/******************************************************************************
 * @file admission/line_dag.hpp
 *
 * @brief Line dag of an annotated dag: the mutable state of a generalized
 *        face elimination. Intermediate vertices stand for paths of the
 *        original dag and carry the (possibly accumulated) Jacobian of that
 *        path; input and output vertices are never removed.
 ******************************************************************************/

#ifndef ADMISSION_LINE_DAG_HPP_
#define ADMISSION_LINE_DAG_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "admission/dag.hpp"

namespace admission {

using VertexId = std::uint32_t;

//! Original vertex indices along a path, source first.
using PathLabel = std::vector<int>;

//! "(0 1 2)"
auto format_label(const PathLabel& label) -> std::string;

enum class Part : std::uint8_t { Input, Intermediate, Output };

//! Flavor of an elimination (tangent, adjoint, explicit product) or of a
//! preaccumulation (tangent or adjoint only).
enum class Mode : std::uint8_t { Tangent, Adjoint, Multiply };

auto mode_name(Mode mode) -> const char*;

struct LineVertex {
   PathLabel label;
   Part part {Part::Intermediate};
   //! Jacobian block is rows x cols = n_sink x n_source.
   std::size_t rows {0};
   std::size_t cols {0};

   bool alive {true};
   bool jacobian_present {false};
   //! Vertex stands for an edge of the original dag.
   bool elemental {false};
   //! Position in Dag::edges() for elemental vertices.
   std::size_t edge {0};
   //! Present while the elemental tangent / adjoint still describes the
   //! vertex's Jacobian; never present on fill.
   std::optional<Cost> tangent_cost;
   std::optional<Cost> adjoint_cost;

   //! Sorted ascending.
   std::vector<VertexId> preds;
   std::vector<VertexId> succs;

   [[nodiscard]] auto source() const -> int {
      return label.front();
   }
   [[nodiscard]] auto sink() const -> int {
      return label.back();
   }
   [[nodiscard]] auto is_intermediate() const -> bool {
      return alive && part == Part::Intermediate;
   }
};

class LineDag {
 public:
   explicit LineDag(std::shared_ptr<const Dag> dag);

   [[nodiscard]] auto dag() const -> const Dag& {
      return *m_dag;
   }
   [[nodiscard]] auto shared_dag() const -> const std::shared_ptr<const Dag>& {
      return m_dag;
   }

   [[nodiscard]] auto vertex(VertexId id) const -> const LineVertex& {
      return m_vertices[id];
   }
   [[nodiscard]] auto vertex(VertexId id) -> LineVertex& {
      return m_vertices[id];
   }
   //! Number of vertex slots ever allocated (alive or not).
   [[nodiscard]] auto slots() const -> std::size_t {
      return m_vertices.size();
   }

   [[nodiscard]] auto inputs() const -> std::vector<VertexId>;
   [[nodiscard]] auto intermediates() const -> std::vector<VertexId>;
   [[nodiscard]] auto outputs() const -> std::vector<VertexId>;
   [[nodiscard]] auto intermediate_count() const -> std::size_t;

   //! Edges between two intermediate vertices, ordered by (left, right) id.
   [[nodiscard]] auto intermediate_edges() const
        -> std::vector<std::pair<VertexId, VertexId>>;
   [[nodiscard]] auto has_intermediate_edges() const -> bool;
   [[nodiscard]] auto has_edge(VertexId from, VertexId to) const -> bool;

   [[nodiscard]] auto find_vertex(const PathLabel& label) const
        -> std::optional<VertexId>;

   //! Size of the original vertex with the given index.
   [[nodiscard]] auto vector_size(int index) const -> std::size_t {
      return m_dag->vector_size(index);
   }

   //! Compact binary key of the state (labels, flags, adjacency); two states
   //! that differ only in vertex ids yield the same key.
   [[nodiscard]] auto canonical_form() const -> std::string;

   // Structural primitives for the elimination engine.
   auto add_vertex(LineVertex v) -> VertexId;
   auto add_edge(VertexId from, VertexId to) -> void;
   auto remove_edge(VertexId from, VertexId to) -> void;
   //! Marks dead and drops all incident edges.
   auto remove_vertex(VertexId id) -> void;

 private:
   std::shared_ptr<const Dag> m_dag;
   std::vector<LineVertex> m_vertices;
};

//! Line dag of a validated dag. Elemental vertices inherit costs and
//! has_jacobian from their edge.
auto build_line_dag(const Dag& dag) -> LineDag;
auto build_line_dag(std::shared_ptr<const Dag> dag) -> LineDag;

//! No intermediate-to-intermediate edge left and every intermediate vertex
//! holds its Jacobian.
auto is_complete(const LineDag& ld) -> bool;

/**
 * One move of the search: either the elimination of an intermediate edge,
 * preceded by the preaccumulations its flavor needs, or the final
 * preaccumulation of an elemental without intermediate neighbors.
 */
struct Action {
   enum class Kind : std::uint8_t { Eliminate, Finalize };

   Kind kind {Kind::Eliminate};
   Mode mode {Mode::Tangent};
   VertexId left {0};
   //! Equals left for Finalize.
   VertexId right {0};
   bool preaccumulate_left {false};
   bool preaccumulate_right {false};

   [[nodiscard]] auto fused() const -> bool {
      return preaccumulate_left || preaccumulate_right;
   }
};

//! Face label for eliminations (left label followed by right label minus the
//! shared pivot), vertex label for finalizations.
auto action_label(const LineDag& ld, const Action& a) -> PathLabel;

/**
 * Identity of an action that survives vertex renumbering:
 * (label, kind, mode, left label, right label).
 */
struct ActionKey {
   PathLabel label;
   Action::Kind kind {Action::Kind::Eliminate};
   Mode mode {Mode::Tangent};
   PathLabel left;
   PathLabel right;

   auto operator<=>(const ActionKey&) const = default;
};

auto action_key(const LineDag& ld, const Action& a) -> ActionKey;

/**
 * All actions admissible in the current state, sorted by action_key():
 *  - TAN if the left Jacobian is present (or preaccumulable) and the right
 *    vertex still has its tangent model,
 *  - ADJ if the right Jacobian is present (or preaccumulable) and the left
 *    vertex still has its adjoint model,
 *  - MUL if both Jacobians are present (or preaccumulable),
 *  - Finalize for elementals without Jacobian and without intermediate
 *    neighbors; its mode is the cheaper preaccumulation flavor.
 */
auto eliminatable_targets(const LineDag& ld) -> std::vector<Action>;

//! eliminatable_targets() together with each action's key.
auto keyed_targets(const LineDag& ld)
     -> std::vector<std::pair<ActionKey, Action>>;

}  // namespace admission

#endif  // ADMISSION_LINE_DAG_HPP_
