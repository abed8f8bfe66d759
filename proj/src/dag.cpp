#include "admission/dag.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

#include "admission/error.hpp"

namespace admission {

Dag::Dag(std::vector<DagVertex> vertices, std::vector<DagEdge> edges)
     : m_vertices(std::move(vertices)), m_edges(std::move(edges)) {
   for (std::size_t k = 0; k < m_vertices.size(); ++k) {
      const DagVertex& v = m_vertices[k];
      if (v.vector_size == 0) {
         throw InvalidDag(
              fmt::format("vertex {}: vector_size must be >= 1", v.index));
      }
      if (!m_position.emplace(v.index, k).second) {
         throw InvalidDag(fmt::format("duplicate vertex index {}", v.index));
      }
   }

   m_out.resize(m_vertices.size());
   m_in.resize(m_vertices.size());
   std::set<std::pair<int, int>> seen;
   for (std::size_t k = 0; k < m_edges.size(); ++k) {
      const DagEdge& e = m_edges[k];
      if (!contains(e.source) || !contains(e.target)) {
         throw InvalidDag(fmt::format("edge ({},{}) references unknown vertex",
                                      e.source, e.target));
      }
      if (!seen.emplace(e.source, e.target).second) {
         throw InvalidDag(
              fmt::format("duplicate edge ({},{})", e.source, e.target));
      }
      m_out[position(e.source)].push_back(k);
      m_in[position(e.target)].push_back(k);
   }
}

auto Dag::position(int index) const -> std::size_t {
   const auto it = m_position.find(index);
   if (it == m_position.end()) {
      throw InvalidDag(fmt::format("no vertex with index {}", index));
   }
   return it->second;
}

auto Dag::vector_size(int index) const -> std::size_t {
   return m_vertices[position(index)].vector_size;
}

auto Dag::find_edge(int source, int target) const
     -> std::optional<std::size_t> {
   if (!contains(source)) {
      return std::nullopt;
   }
   for (const std::size_t k : m_out[position(source)]) {
      if (m_edges[k].target == target) {
         return k;
      }
   }
   return std::nullopt;
}

auto Dag::out_edges(int index) const -> const std::vector<std::size_t>& {
   return m_out[position(index)];
}

auto Dag::in_edges(int index) const -> const std::vector<std::size_t>& {
   return m_in[position(index)];
}

auto Dag::inputs() const -> std::vector<int> {
   std::vector<int> result;
   for (std::size_t k = 0; k < m_vertices.size(); ++k) {
      if (m_in[k].empty()) {
         result.push_back(m_vertices[k].index);
      }
   }
   std::ranges::sort(result);
   return result;
}

auto Dag::outputs() const -> std::vector<int> {
   std::vector<int> result;
   for (std::size_t k = 0; k < m_vertices.size(); ++k) {
      if (m_out[k].empty()) {
         result.push_back(m_vertices[k].index);
      }
   }
   std::ranges::sort(result);
   return result;
}

auto Dag::topological_order() const -> std::vector<int> {
   std::vector<std::size_t> pending(m_vertices.size());
   std::priority_queue<int, std::vector<int>, std::greater<>> ready;
   for (std::size_t k = 0; k < m_vertices.size(); ++k) {
      pending[k] = m_in[k].size();
      if (pending[k] == 0) {
         ready.push(m_vertices[k].index);
      }
   }

   std::vector<int> order;
   order.reserve(m_vertices.size());
   while (!ready.empty()) {
      const int v = ready.top();
      ready.pop();
      order.push_back(v);
      for (const std::size_t k : m_out[position(v)]) {
         const std::size_t t = position(m_edges[k].target);
         if (--pending[t] == 0) {
            ready.push(m_edges[k].target);
         }
      }
   }

   if (order.size() != m_vertices.size()) {
      return {};
   }
   return order;
}

auto Dag::same_structure(const Dag& other) const -> bool {
   auto sorted_vertices = [](const Dag& d) {
      std::vector<DagVertex> v = d.vertices();
      std::ranges::sort(v, {}, &DagVertex::index);
      return v;
   };
   auto sorted_edges = [](const Dag& d) {
      std::vector<DagEdge> e = d.edges();
      std::ranges::sort(e, [](const DagEdge& a, const DagEdge& b) {
         return std::tie(a.source, a.target) < std::tie(b.source, b.target);
      });
      return e;
   };
   return sorted_vertices(*this) == sorted_vertices(other) &&
          sorted_edges(*this) == sorted_edges(other);
}

namespace {

//! Returns a cycle as a closed vertex list, or empty if there is none.
auto find_cycle(const Dag& dag) -> std::vector<int> {
   enum class Color { White, Grey, Black };
   const auto& vertices = dag.vertices();
   std::vector<Color> color(vertices.size(), Color::White);
   std::vector<int> stack;

   std::function<std::vector<int>(int)> visit = [&](int v) -> std::vector<int> {
      color[dag.position(v)] = Color::Grey;
      stack.push_back(v);
      for (const std::size_t k : dag.out_edges(v)) {
         const int t = dag.edges()[k].target;
         const Color c = color[dag.position(t)];
         if (c == Color::Grey) {
            auto first = std::ranges::find(stack, t);
            std::vector<int> cycle(first, stack.end());
            cycle.push_back(t);
            return cycle;
         }
         if (c == Color::White) {
            if (auto cycle = visit(t); !cycle.empty()) {
               return cycle;
            }
         }
      }
      stack.pop_back();
      color[dag.position(v)] = Color::Black;
      return {};
   };

   for (const DagVertex& v : vertices) {
      if (color[dag.position(v.index)] == Color::White) {
         if (auto cycle = visit(v.index); !cycle.empty()) {
            return cycle;
         }
      }
   }
   return {};
}

}  // namespace

auto validate_dag(const Dag& dag) -> void {
   if (const auto cycle = find_cycle(dag); !cycle.empty()) {
      throw CycleDetected(
           fmt::format("cycle detected: {}", fmt::join(cycle, " -> ")));
   }

   // In an acyclic graph every vertex lies on some input-to-output path; the
   // only way to be on none that matters is having no edges at all while the
   // rest of the graph does.
   if (dag.edges().empty()) {
      return;
   }
   for (const DagVertex& v : dag.vertices()) {
      if (dag.in_edges(v.index).empty() && dag.out_edges(v.index).empty()) {
         throw DanglingVertex(fmt::format(
              "vertex {} lies on no input-to-output path", v.index));
      }
   }
}

auto transpose_dag(const Dag& dag) -> Dag {
   std::vector<DagEdge> edges;
   edges.reserve(dag.edges().size());
   for (const DagEdge& e : dag.edges()) {
      DagEdge t = e;
      t.source = e.target;
      t.target = e.source;
      t.tangent_cost = e.adjoint_cost;
      t.adjoint_cost = e.tangent_cost;
      edges.push_back(t);
   }
   return Dag(dag.vertices(), std::move(edges));
}

auto dense_tangent_cost(const Dag& dag) -> Cost {
   Cost width = 0;
   for (const int x : dag.inputs()) {
      width += dag.vector_size(x);
   }
   Cost sweep = 0;
   for (const DagEdge& e : dag.edges()) {
      sweep += e.tangent_cost;
   }
   return width * sweep;
}

auto dense_adjoint_cost(const Dag& dag) -> Cost {
   Cost width = 0;
   for (const int y : dag.outputs()) {
      width += dag.vector_size(y);
   }
   Cost sweep = 0;
   for (const DagEdge& e : dag.edges()) {
      sweep += e.adjoint_cost;
   }
   return width * sweep;
}

}  // namespace admission
