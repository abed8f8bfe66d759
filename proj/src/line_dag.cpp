#include "admission/line_dag.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <tuple>

namespace admission {

auto format_label(const PathLabel& label) -> std::string {
   return fmt::format("({})", fmt::join(label, " "));
}

auto mode_name(Mode mode) -> const char* {
   switch (mode) {
      case Mode::Tangent:
         return "TAN";
      case Mode::Adjoint:
         return "ADJ";
      case Mode::Multiply:
         return "MUL";
   }
   return "???";
}

LineDag::LineDag(std::shared_ptr<const Dag> dag) : m_dag(std::move(dag)) {
   const Dag& g = *m_dag;

   std::vector<VertexId> input_of(g.vertices().size(), 0);
   std::vector<VertexId> output_of(g.vertices().size(), 0);
   std::vector<bool> is_input(g.vertices().size(), false);
   std::vector<bool> is_output(g.vertices().size(), false);

   for (const int x : g.inputs()) {
      LineVertex v;
      v.label = {x};
      v.part = Part::Input;
      v.rows = v.cols = g.vector_size(x);
      input_of[g.position(x)] = add_vertex(std::move(v));
      is_input[g.position(x)] = true;
   }

   std::vector<VertexId> of_edge(g.edges().size());
   for (std::size_t k = 0; k < g.edges().size(); ++k) {
      const DagEdge& e = g.edges()[k];
      LineVertex v;
      v.label = {e.source, e.target};
      v.rows = g.vector_size(e.target);
      v.cols = g.vector_size(e.source);
      v.elemental = true;
      v.edge = k;
      v.jacobian_present = e.has_jacobian;
      v.tangent_cost = e.tangent_cost;
      v.adjoint_cost = e.adjoint_cost;
      of_edge[k] = add_vertex(std::move(v));
   }

   for (const int y : g.outputs()) {
      LineVertex v;
      v.label = {y};
      v.part = Part::Output;
      v.rows = v.cols = g.vector_size(y);
      output_of[g.position(y)] = add_vertex(std::move(v));
      is_output[g.position(y)] = true;
   }

   for (std::size_t k = 0; k < g.edges().size(); ++k) {
      const DagEdge& e = g.edges()[k];
      if (is_input[g.position(e.source)]) {
         add_edge(input_of[g.position(e.source)], of_edge[k]);
      }
      for (const std::size_t next : g.out_edges(e.target)) {
         add_edge(of_edge[k], of_edge[next]);
      }
      if (is_output[g.position(e.target)]) {
         add_edge(of_edge[k], output_of[g.position(e.target)]);
      }
   }
}

auto LineDag::inputs() const -> std::vector<VertexId> {
   std::vector<VertexId> ids;
   for (VertexId id = 0; id < m_vertices.size(); ++id) {
      if (m_vertices[id].alive && m_vertices[id].part == Part::Input) {
         ids.push_back(id);
      }
   }
   return ids;
}

auto LineDag::intermediates() const -> std::vector<VertexId> {
   std::vector<VertexId> ids;
   for (VertexId id = 0; id < m_vertices.size(); ++id) {
      if (m_vertices[id].is_intermediate()) {
         ids.push_back(id);
      }
   }
   return ids;
}

auto LineDag::outputs() const -> std::vector<VertexId> {
   std::vector<VertexId> ids;
   for (VertexId id = 0; id < m_vertices.size(); ++id) {
      if (m_vertices[id].alive && m_vertices[id].part == Part::Output) {
         ids.push_back(id);
      }
   }
   return ids;
}

auto LineDag::intermediate_count() const -> std::size_t {
   return static_cast<std::size_t>(std::ranges::count_if(
        m_vertices, [](const LineVertex& v) { return v.is_intermediate(); }));
}

auto LineDag::intermediate_edges() const
     -> std::vector<std::pair<VertexId, VertexId>> {
   std::vector<std::pair<VertexId, VertexId>> edges;
   for (VertexId id = 0; id < m_vertices.size(); ++id) {
      if (!m_vertices[id].is_intermediate()) {
         continue;
      }
      for (const VertexId s : m_vertices[id].succs) {
         if (m_vertices[s].part == Part::Intermediate) {
            edges.emplace_back(id, s);
         }
      }
   }
   return edges;
}

auto LineDag::has_intermediate_edges() const -> bool {
   for (const LineVertex& v : m_vertices) {
      if (!v.is_intermediate()) {
         continue;
      }
      for (const VertexId s : v.succs) {
         if (m_vertices[s].part == Part::Intermediate) {
            return true;
         }
      }
   }
   return false;
}

auto LineDag::has_edge(VertexId from, VertexId to) const -> bool {
   return std::ranges::binary_search(m_vertices[from].succs, to);
}

auto LineDag::find_vertex(const PathLabel& label) const
     -> std::optional<VertexId> {
   for (VertexId id = 0; id < m_vertices.size(); ++id) {
      if (m_vertices[id].is_intermediate() && m_vertices[id].label == label) {
         return id;
      }
   }
   return std::nullopt;
}

auto LineDag::canonical_form() const -> std::string {
   auto vertex_key = [this](VertexId id) {
      const LineVertex& v = m_vertices[id];
      return std::make_tuple(v.part, std::cref(v.label), v.jacobian_present,
                             v.tangent_cost.has_value(),
                             v.adjoint_cost.has_value());
   };

   std::vector<VertexId> ids;
   for (VertexId id = 0; id < m_vertices.size(); ++id) {
      if (m_vertices[id].alive) {
         ids.push_back(id);
      }
   }
   std::ranges::sort(ids, [&](VertexId a, VertexId b) {
      return vertex_key(a) < vertex_key(b);
   });
   std::vector<std::uint32_t> rank(m_vertices.size(), 0);
   for (std::uint32_t k = 0; k < ids.size(); ++k) {
      rank[ids[k]] = k;
   }

   std::string key;
   auto put = [&key](std::int32_t value) {
      key.append(reinterpret_cast<const char*>(&value), sizeof value);
   };
   std::vector<std::uint32_t> adjacent;
   for (const VertexId id : ids) {
      const LineVertex& v = m_vertices[id];
      put(static_cast<std::int32_t>(v.part) << 3 |
          std::int32_t(v.jacobian_present) << 2 |
          std::int32_t(v.tangent_cost.has_value()) << 1 |
          std::int32_t(v.adjoint_cost.has_value()));
      put(static_cast<std::int32_t>(v.label.size()));
      for (const int i : v.label) {
         put(i);
      }
      for (const auto* list : {&v.preds, &v.succs}) {
         adjacent.clear();
         for (const VertexId w : *list) {
            adjacent.push_back(rank[w]);
         }
         std::ranges::sort(adjacent);
         put(static_cast<std::int32_t>(adjacent.size()));
         for (const std::uint32_t r : adjacent) {
            put(static_cast<std::int32_t>(r));
         }
      }
   }
   return key;
}

auto LineDag::add_vertex(LineVertex v) -> VertexId {
   const auto id = static_cast<VertexId>(m_vertices.size());
   m_vertices.push_back(std::move(v));
   return id;
}

namespace {

auto insert_sorted(std::vector<VertexId>& ids, VertexId id) -> void {
   const auto it = std::ranges::lower_bound(ids, id);
   if (it == ids.end() || *it != id) {
      ids.insert(it, id);
   }
}

auto erase_sorted(std::vector<VertexId>& ids, VertexId id) -> void {
   const auto it = std::ranges::lower_bound(ids, id);
   if (it != ids.end() && *it == id) {
      ids.erase(it);
   }
}

}  // namespace

auto LineDag::add_edge(VertexId from, VertexId to) -> void {
   insert_sorted(m_vertices[from].succs, to);
   insert_sorted(m_vertices[to].preds, from);
}

auto LineDag::remove_edge(VertexId from, VertexId to) -> void {
   erase_sorted(m_vertices[from].succs, to);
   erase_sorted(m_vertices[to].preds, from);
}

auto LineDag::remove_vertex(VertexId id) -> void {
   LineVertex& v = m_vertices[id];
   for (const VertexId p : v.preds) {
      erase_sorted(m_vertices[p].succs, id);
   }
   for (const VertexId s : v.succs) {
      erase_sorted(m_vertices[s].preds, id);
   }
   v.preds.clear();
   v.succs.clear();
   v.alive = false;
}

auto build_line_dag(const Dag& dag) -> LineDag {
   return LineDag(std::make_shared<const Dag>(dag));
}

auto build_line_dag(std::shared_ptr<const Dag> dag) -> LineDag {
   return LineDag(std::move(dag));
}

auto is_complete(const LineDag& ld) -> bool {
   for (VertexId id = 0; id < ld.slots(); ++id) {
      const LineVertex& v = ld.vertex(id);
      if (v.is_intermediate() && !v.jacobian_present) {
         return false;
      }
   }
   return !ld.has_intermediate_edges();
}

auto action_label(const LineDag& ld, const Action& a) -> PathLabel {
   const PathLabel& left = ld.vertex(a.left).label;
   if (a.kind == Action::Kind::Finalize) {
      return left;
   }
   const PathLabel& right = ld.vertex(a.right).label;
   PathLabel face = left;
   face.insert(face.end(), right.begin() + 1, right.end());
   return face;
}

auto action_key(const LineDag& ld, const Action& a) -> ActionKey {
   return ActionKey {action_label(ld, a), a.kind, a.mode,
                     ld.vertex(a.left).label, ld.vertex(a.right).label};
}

auto keyed_targets(const LineDag& ld)
     -> std::vector<std::pair<ActionKey, Action>> {
   std::vector<Action> actions;

   for (VertexId l = 0; l < ld.slots(); ++l) {
      const LineVertex& left = ld.vertex(l);
      if (!left.is_intermediate()) {
         continue;
      }

      bool has_intermediate_neighbor = false;
      for (const VertexId p : left.preds) {
         has_intermediate_neighbor |= ld.vertex(p).part == Part::Intermediate;
      }

      for (const VertexId r : left.succs) {
         const LineVertex& right = ld.vertex(r);
         if (right.part != Part::Intermediate) {
            continue;
         }
         has_intermediate_neighbor = true;

         // Only elementals lack a Jacobian, and they keep both models until
         // accumulated, so a missing Jacobian is always obtainable.
         if (right.tangent_cost) {
            actions.push_back({Action::Kind::Eliminate, Mode::Tangent, l, r,
                               !left.jacobian_present, false});
         }
         if (left.adjoint_cost) {
            actions.push_back({Action::Kind::Eliminate, Mode::Adjoint, l, r,
                               false, !right.jacobian_present});
         }
         actions.push_back({Action::Kind::Eliminate, Mode::Multiply, l, r,
                            !left.jacobian_present, !right.jacobian_present});
      }

      if (!left.jacobian_present && !has_intermediate_neighbor) {
         const Cost tangent = left.cols * *left.tangent_cost;
         const Cost adjoint = left.rows * *left.adjoint_cost;
         actions.push_back({Action::Kind::Finalize,
                            tangent <= adjoint ? Mode::Tangent : Mode::Adjoint,
                            l, l, true, false});
      }
   }

   std::vector<std::pair<ActionKey, Action>> keyed;
   keyed.reserve(actions.size());
   for (const Action& a : actions) {
      keyed.emplace_back(action_key(ld, a), a);
   }
   std::ranges::stable_sort(keyed, {}, &std::pair<ActionKey, Action>::first);
   return keyed;
}

auto eliminatable_targets(const LineDag& ld) -> std::vector<Action> {
   std::vector<Action> actions;
   for (auto& [key, a] : keyed_targets(ld)) {
      actions.push_back(a);
   }
   return actions;
}

}  // namespace admission
