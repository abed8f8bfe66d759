#include "admission/branch_and_bound.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "admission/heuristics.hpp"

namespace admission {

namespace {

constexpr Cost infinite_cost = std::numeric_limits<Cost>::max();

auto saturating_mul(Cost a, Cost b) -> Cost {
   if (a == 0 || b == 0) {
      return 0;
   }
   if (a > infinite_cost / b) {
      return infinite_cost;
   }
   return a * b;
}

auto saturating_add(Cost a, Cost b) -> Cost {
   return a > infinite_cost - b ? infinite_cost : a + b;
}

using Clock = std::chrono::steady_clock;

//! Vertices whose state or neighborhood an action can change.
auto touched_set(const LineDag& ld, const Action& a) -> std::vector<VertexId> {
   std::vector<VertexId> out;
   for (const VertexId v : {a.left, a.right}) {
      const LineVertex& lv = ld.vertex(v);
      out.push_back(v);
      out.insert(out.end(), lv.preds.begin(), lv.preds.end());
      out.insert(out.end(), lv.succs.begin(), lv.succs.end());
   }
   std::ranges::sort(out);
   out.erase(std::unique(out.begin(), out.end()), out.end());
   return out;
}

auto disjoint(const std::vector<VertexId>& a, const std::vector<VertexId>& b)
     -> bool {
   auto i = a.begin();
   auto j = b.begin();
   while (i != a.end() && j != b.end()) {
      if (*i == *j) {
         return false;
      }
      if (*i < *j) {
         ++i;
      } else {
         ++j;
      }
   }
   return true;
}

//! Partial plans share their prefixes.
struct PlanLink {
   std::shared_ptr<const PlanLink> parent;
   Plan part;
};

auto materialize(const std::shared_ptr<const PlanLink>& tail) -> Plan {
   std::vector<const PlanLink*> chain;
   for (const PlanLink* link = tail.get(); link != nullptr;
        link = link->parent.get()) {
      chain.push_back(link);
   }
   Plan plan;
   for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      plan.steps.insert(plan.steps.end(), (*it)->part.steps.begin(),
                        (*it)->part.steps.end());
   }
   return plan;
}

struct Child {
   LineDag state;
   Cost cost_so_far {0};
   std::shared_ptr<const PlanLink> plan;
   Cost bound {0};
   ActionKey key;
   std::vector<VertexId> touched;
};

struct Incumbent {
   std::mutex mutex;
   std::atomic<Cost> cost {infinite_cost};
   Plan plan;
   std::string text;
   std::vector<std::pair<double, Cost>> history;
};

class Search {
 public:
   Search(const Dag& dag, const BranchAndBoundOptions& options)
       : m_dag(dag), m_options(options), m_bound(dag), m_start(Clock::now()) {
      if (options.time_limit_s) {
         m_deadline = m_start + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(
                                          *options.time_limit_s));
      }
   }

   auto offer(const Plan& plan, Cost cost) -> void {
      if (cost > m_incumbent.cost.load()) {
         return;
      }
      std::string text = render_plan(plan);
      const std::lock_guard lock(m_incumbent.mutex);
      const Cost current = m_incumbent.cost.load();
      if (cost < current || (cost == current && text < m_incumbent.text)) {
         m_incumbent.plan = plan;
         m_incumbent.text = std::move(text);
         m_incumbent.cost.store(cost);
         if (cost < current) {
            m_incumbent.history.emplace_back(seconds(), cost);
         }
      }
   }

   auto expired() -> bool {
      if (m_stop.load(std::memory_order_relaxed)) {
         return true;
      }
      if (m_deadline && Clock::now() >= *m_deadline) {
         m_stop.store(true);
         return true;
      }
      return false;
   }

   //! Per visited state and action: the lowest cost at which the action has
   //! been expanded, and a lower bound on any completion that starts with it.
   struct MemoEntry {
      Cost explored {infinite_cost};
      Cost completion {0};
   };
   using MemoRow = std::vector<MemoEntry>;

   //! Clears the allowed flag of every action that was already expanded at no
   //! higher cost or whose recorded completion bound reaches the incumbent.
   //! For those actions `values` receives the recorded completion bound.
   auto claim(const std::string& state, Cost cost, std::vector<bool>& allowed,
              std::vector<Cost>& values) -> MemoRow* {
      const std::lock_guard lock(m_memo_mutex);
      auto it = m_memo.find(state);
      if (it == m_memo.end()) {
         if (m_memo.size() >= m_options.memo_limit) {
            return nullptr;
         }
         it = m_memo.emplace(state, MemoRow(allowed.size())).first;
      }
      const Cost incumbent = m_incumbent.cost.load();
      MemoRow& row = it->second;
      for (std::size_t k = 0; k < allowed.size(); ++k) {
         if (!allowed[k]) {
            continue;
         }
         if (row[k].explored <= cost ||
             saturating_add(cost, row[k].completion) >= incumbent) {
            allowed[k] = false;
            values[k] = row[k].completion;
         } else {
            row[k].explored = cost;
         }
      }
      return &row;
   }

   auto record(MemoRow* row, std::size_t k, Cost completion) -> void {
      if (row == nullptr || m_stop.load(std::memory_order_relaxed)) {
         return;
      }
      const std::lock_guard lock(m_memo_mutex);
      (*row)[k].completion = std::max((*row)[k].completion, completion);
   }

   //! Explores the subtree below `here` and returns a lower bound on the cost
   //! of completing it with the actions this node is responsible for. The
   //! value is meaningless once the search has been stopped.
   auto dfs(const Child& here, bool has_via, std::size_t depth) -> Cost {
      if (expired()) {
         return 0;
      }
      const LineDag& state = here.state;
      auto targets = keyed_targets(state);
      if (targets.empty()) {
         m_visited.fetch_add(1, std::memory_order_relaxed);
         if (is_complete(state)) {
            offer(materialize(here.plan), here.cost_so_far);
            return 0;
         }
         return infinite_cost;
      }

      std::vector<std::vector<VertexId>> touched;
      std::vector<bool> allowed(targets.size(), true);
      std::vector<bool> compressed(targets.size(), false);
      for (std::size_t k = 0; k < targets.size(); ++k) {
         touched.push_back(touched_set(state, targets[k].second));
         compressed[k] = has_via && m_options.compress_independent &&
                         targets[k].first < here.key &&
                         disjoint(touched[k], here.touched);
         allowed[k] = !compressed[k];
      }
      std::vector<Cost> values(targets.size(), infinite_cost);
      MemoRow* row = nullptr;
      if (m_options.memo_limit > 0) {
         row = claim(state.canonical_form(), here.cost_so_far, allowed, values);
         if (std::ranges::none_of(allowed, std::identity {})) {
            m_pruned.fetch_add(1, std::memory_order_relaxed);
            return std::ranges::min(values);
         }
      }
      m_visited.fetch_add(1, std::memory_order_relaxed);

      if (depth <= m_options.upper_bound_depth) {
         LineDag greedy = state;
         Plan suffix;
         const Cost cost = greedy_completion(greedy, &suffix);
         if (is_complete(greedy)) {
            Plan full = materialize(here.plan);
            full.steps.insert(full.steps.end(), suffix.steps.begin(),
                              suffix.steps.end());
            offer(full, here.cost_so_far + cost);
         }
      }

      std::vector<Child> children;
      std::vector<std::size_t> slot;
      for (std::size_t k = 0; k < targets.size(); ++k) {
         if (!allowed[k]) {
            continue;
         }
         Child child {state, here.cost_so_far, nullptr, 0,
                      std::move(targets[k].first), std::move(touched[k])};
         auto link = std::make_shared<PlanLink>();
         link->parent = here.plan;
         child.cost_so_far +=
              apply_action(child.state, targets[k].second, &link->part);
         child.plan = std::move(link);
         child.bound = m_options.use_lower_bound
                            ? m_bound(child.state, child.cost_so_far)
                            : child.cost_so_far;
         children.push_back(std::move(child));
         slot.push_back(k);
      }
      m_generated.fetch_add(children.size(), std::memory_order_relaxed);
      std::vector<std::size_t> visit(children.size());
      std::iota(visit.begin(), visit.end(), std::size_t {0});
      order(children, visit, here.cost_so_far, depth);

      auto expand = [&](std::size_t c) {
         const Child& child = children[c];
         const Cost step = child.cost_so_far - here.cost_so_far;
         const Cost value = saturating_add(step, descend(child, depth));
         values[slot[c]] = value;
         record(row, slot[c], value);
      };
      if (depth == 0) {
         // Root children are shared among the workers.
         std::atomic<std::size_t> next {0};
         auto worker = [&] {
            for (std::size_t k = next.fetch_add(1); k < visit.size();
                 k = next.fetch_add(1)) {
               expand(visit[k]);
            }
         };
         const std::size_t workers = std::max<std::size_t>(1, m_options.workers);
         {
            std::vector<std::jthread> pool;
            for (std::size_t w = 1; w < workers; ++w) {
               pool.emplace_back(worker);
            }
            worker();
         }
         return std::ranges::min(values);
      }
      for (const std::size_t c : visit) {
         expand(c);
         if (m_stop.load(std::memory_order_relaxed)) {
            return 0;
         }
      }
      return std::ranges::min(values);
   }

   //! Completion bound below `child`, measured from the child itself.
   auto descend(const Child& child, std::size_t depth) -> Cost {
      if (child.bound >= m_incumbent.cost.load()) {
         m_pruned.fetch_add(1, std::memory_order_relaxed);
         return child.bound - child.cost_so_far;
      }
      return std::max(dfs(child, true, depth + 1),
                      child.bound - child.cost_so_far);
   }

   //! Ascending lower bound, fixed action order among equals unless a seed
   //! asks for a shuffle.
   auto order(const std::vector<Child>& children,
              std::vector<std::size_t>& visit, Cost cost_so_far,
              std::size_t depth) const -> void {
      auto bound = [&](std::size_t c) { return children[c].bound; };
      std::ranges::stable_sort(visit, {}, bound);
      if (m_options.seed == 0) {
         return;
      }
      std::mt19937_64 rng(m_options.seed ^ (cost_so_far * 0x9E3779B97F4A7C15ULL) ^
                          (depth << 32U) ^ children.size());
      auto first = visit.begin();
      while (first != visit.end()) {
         auto last = std::find_if(first, visit.end(), [&](std::size_t c) {
            return bound(c) != bound(*first);
         });
         std::shuffle(first, last, rng);
         first = last;
      }
   }

   auto run() -> PlanReport {
      PlanReport report;
      report.method = "BranchAndBound";
      report.dense_tangent_cost = dense_tangent_cost(m_dag);
      report.dense_adjoint_cost = dense_adjoint_cost(m_dag);

      for (const Plan& seed : {plan_sparse_tangent(m_dag),
                               plan_sparse_adjoint(m_dag),
                               plan_greedy_min_fill(m_dag)}) {
         offer(seed, seed.total_cost());
      }

      Child root {build_line_dag(m_dag), 0, nullptr, 0, {}, {}};
      root.bound = m_options.use_lower_bound ? m_bound(root.state, 0) : 0;
      m_generated.fetch_add(1);
      if (root.bound < m_incumbent.cost.load()) {
         dfs(root, false, 0);
      } else {
         m_pruned.fetch_add(1);
      }
      const bool exhausted = !m_stop.load();

      SearchStats stats;
      stats.nodes_generated = m_generated.load();
      stats.nodes_visited = m_visited.load();
      stats.nodes_pruned = m_pruned.load();
      stats.incumbent_cost = m_incumbent.cost.load();
      stats.proven_optimal = exhausted;
      stats.elapsed_s = seconds();
      stats.incumbent_history = m_incumbent.history;

      report.plan = m_incumbent.plan;
      report.total_cost = m_incumbent.cost.load();
      report.optimal = exhausted;
      report.elapsed_s = stats.elapsed_s;
      report.stats = std::move(stats);
      return report;
   }

 private:
   [[nodiscard]] auto seconds() const -> double {
      return std::chrono::duration<double>(Clock::now() - m_start).count();
   }

   const Dag& m_dag;
   BranchAndBoundOptions m_options;
   LowerBound m_bound;
   Clock::time_point m_start;
   std::optional<Clock::time_point> m_deadline;
   std::atomic<bool> m_stop {false};
   std::atomic<std::size_t> m_generated {0};
   std::atomic<std::size_t> m_visited {0};
   std::atomic<std::size_t> m_pruned {0};
   Incumbent m_incumbent;

   std::mutex m_memo_mutex;
   std::unordered_map<std::string, MemoRow> m_memo;
};

}  // namespace

LowerBound::LowerBound(const Dag& dag) : m_dag(&dag) {
   const auto& vertices = dag.vertices();
   const std::size_t n = vertices.size();
   const auto order = dag.topological_order();

   m_reach.assign(n, std::vector<char>(n, 0));
   for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t p = dag.position(*it);
      m_reach[p][p] = 1;
      for (const std::size_t e : dag.out_edges(*it)) {
         const std::size_t q = dag.position(dag.edges()[e].target);
         for (std::size_t r = 0; r < n; ++r) {
            m_reach[p][r] |= m_reach[q][r];
         }
      }
   }

   m_pivots.resize(n);
   for (std::size_t p = 0; p < n; ++p) {
      PivotData& d = m_pivots[p];
      d.pivot_size = vertices[p].vector_size;
      d.min_source_size = infinite_cost;
      d.min_sink_size = infinite_cost;
      d.min_above_or_self = infinite_cost;
      d.min_below_or_self = infinite_cost;
      for (std::size_t q = 0; q < n; ++q) {
         const Cost size = vertices[q].vector_size;
         if (m_reach[q][p] != 0) {
            d.min_above_or_self = std::min(d.min_above_or_self, size);
            if (q != p) {
               d.min_source_size = std::min(d.min_source_size, size);
            }
         }
         if (m_reach[p][q] != 0) {
            d.min_below_or_self = std::min(d.min_below_or_self, size);
            if (q != p) {
               d.min_sink_size = std::min(d.min_sink_size, size);
            }
         }
      }
   }
}

auto LowerBound::overlap(std::size_t a, std::size_t b, bool upward) const
     -> bool {
   for (std::size_t r = 0; r < m_reach.size(); ++r) {
      const bool in_a = upward ? m_reach[r][a] != 0 : m_reach[a][r] != 0;
      const bool in_b = upward ? m_reach[r][b] != 0 : m_reach[b][r] != 0;
      if (in_a && in_b) {
         return true;
      }
   }
   return false;
}

auto LowerBound::packing(const std::vector<std::pair<std::size_t, Cost>>& items,
                         bool upward) const -> Cost {
   // Heaviest subset of pairwise non-overlapping closures; exhaustive for
   // small sets, greedy by weight otherwise.
   const std::size_t k = items.size();
   std::vector<std::uint32_t> conflicts(k, 0);
   for (std::size_t a = 0; a < k && k <= 16; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
         if (overlap(items[a].first, items[b].first, upward)) {
            conflicts[a] |= 1U << b;
            conflicts[b] |= 1U << a;
         }
      }
   }
   if (k <= 16) {
      Cost best = 0;
      for (std::uint32_t mask = 0; mask < (1U << k); ++mask) {
         Cost sum = 0;
         bool feasible = true;
         for (std::size_t a = 0; a < k && feasible; ++a) {
            if ((mask >> a & 1U) != 0) {
               feasible = (conflicts[a] & mask) == 0;
               sum = saturating_add(sum, items[a].second);
            }
         }
         if (feasible) {
            best = std::max(best, sum);
         }
      }
      return best;
   }
   auto sorted = items;
   std::ranges::sort(sorted, std::ranges::greater {},
                     &std::pair<std::size_t, Cost>::second);
   std::vector<std::size_t> taken;
   Cost sum = 0;
   for (const auto& [position, weight] : sorted) {
      if (std::ranges::none_of(taken, [&](std::size_t t) {
             return overlap(t, position, upward);
          })) {
         taken.push_back(position);
         sum = saturating_add(sum, weight);
      }
   }
   return sum;
}

auto LowerBound::operator()(const LineDag& state, Cost cost_so_far) const
     -> Cost {
   const std::size_t n = m_pivots.size();
   const Dag& dag = *m_dag;

   std::vector<Cost> min_tangent_out(n, infinite_cost);
   std::vector<Cost> min_adjoint_in(n, infinite_cost);
   std::vector<Cost> edge_tangent(dag.edges().size(), infinite_cost);
   std::vector<Cost> edge_adjoint(dag.edges().size(), infinite_cost);
   // Elementals still lacking their Jacobian while feeding (left) or fed by
   // (right) another intermediate vertex, with their preaccumulation cost.
   std::vector<char> open_left(dag.edges().size(), 0);
   std::vector<char> open_right(dag.edges().size(), 0);
   std::vector<Cost> edge_preaccumulation(dag.edges().size(), 0);
   // Sources entering / sinks leaving each pivot through a Z-Z edge.
   std::vector<std::vector<std::size_t>> sources(n);
   std::vector<std::vector<std::size_t>> sinks(n);

   Cost bound = cost_so_far;
   for (VertexId v = 0; v < state.slots(); ++v) {
      const LineVertex& lv = state.vertex(v);
      if (!lv.is_intermediate()) {
         continue;
      }
      if (lv.elemental && lv.tangent_cost) {
         Cost& t = min_tangent_out[dag.position(lv.source())];
         t = std::min(t, *lv.tangent_cost);
         edge_tangent[lv.edge] = *lv.tangent_cost;
      }
      if (lv.elemental && lv.adjoint_cost) {
         Cost& a = min_adjoint_in[dag.position(lv.sink())];
         a = std::min(a, *lv.adjoint_cost);
         edge_adjoint[lv.edge] = *lv.adjoint_cost;
      }

      bool input_side = false;
      bool output_side = false;
      for (const VertexId p : lv.preds) {
         input_side |= state.vertex(p).part == Part::Input;
         if (lv.elemental && !lv.jacobian_present &&
             state.vertex(p).part == Part::Intermediate) {
            open_right[lv.edge] = 1;
         }
      }
      if (lv.elemental && !lv.jacobian_present) {
         edge_preaccumulation[lv.edge] =
              std::min(saturating_mul(lv.cols, *lv.tangent_cost),
                       saturating_mul(lv.rows, *lv.adjoint_cost));
      }
      for (const VertexId s : lv.succs) {
         const LineVertex& sv = state.vertex(s);
         output_side |= sv.part == Part::Output;
         if (sv.part == Part::Intermediate) {
            if (lv.elemental && !lv.jacobian_present) {
               open_left[lv.edge] = 1;
            }
            const std::size_t pivot = dag.position(lv.sink());
            sources[pivot].push_back(dag.position(lv.source()));
            sinks[pivot].push_back(dag.position(sv.sink()));
         }
      }
      // Connects an input straight to an output: only a preaccumulation
      // can make its Jacobian explicit.
      if (!lv.jacobian_present && input_side && output_side) {
         bound = saturating_add(bound, edge_preaccumulation[lv.edge]);
      }
   }

   std::vector<std::pair<std::size_t, Cost>> items;
   for (std::size_t p = 0; p < n; ++p) {
      if (sources[p].empty()) {
         continue;
      }
      const PivotData& d = m_pivots[p];
      for (auto* list : {&sources[p], &sinks[p]}) {
         std::ranges::sort(*list);
         list->erase(std::unique(list->begin(), list->end()), list->end());
      }

      // A source must eventually be served by an elimination at this pivot
      // whose left endpoint starts at the source or one of its ancestors.
      items.clear();
      const int pivot = dag.vertices()[p].index;
      for (const std::size_t s : sources[p]) {
         const PivotData& ds = m_pivots[s];
         Cost adjoint = infinite_cost;
         for (const std::size_t e : dag.in_edges(pivot)) {
            if (m_reach[dag.position(dag.edges()[e].source)][s] != 0) {
               adjoint = std::min(adjoint, edge_adjoint[e]);
            }
         }
         const Cost tangent =
              saturating_mul(ds.min_above_or_self, min_tangent_out[p]);
         const Cost multiply = saturating_mul(
              saturating_mul(ds.min_above_or_self, d.pivot_size),
              d.min_sink_size);
         Cost cheapest = std::min(
              {tangent, saturating_mul(d.min_sink_size, adjoint), multiply});

         // An elemental leaving a dag input has no other stand-in: it is
         // either the adjoint left endpoint itself or gets preaccumulated.
         const int source = dag.vertices()[s].index;
         if (dag.in_edges(source).empty()) {
            const auto e = dag.find_edge(source, pivot);
            if (e && open_left[*e] != 0) {
               cheapest = std::min(
                    saturating_mul(d.min_sink_size, edge_adjoint[*e]),
                    saturating_add(edge_preaccumulation[*e],
                                   std::min(tangent, multiply)));
            }
         }
         items.emplace_back(s, cheapest);
      }
      const Cost source_side = packing(items, true);

      // Mirror image: sinks are served through themselves or descendants.
      items.clear();
      for (const std::size_t t : sinks[p]) {
         const PivotData& dt = m_pivots[t];
         Cost tangent = infinite_cost;
         for (const std::size_t e : dag.out_edges(pivot)) {
            if (m_reach[t][dag.position(dag.edges()[e].target)] != 0) {
               tangent = std::min(tangent, edge_tangent[e]);
            }
         }
         const Cost adjoint =
              saturating_mul(dt.min_below_or_self, min_adjoint_in[p]);
         const Cost multiply = saturating_mul(
              saturating_mul(d.min_source_size, d.pivot_size),
              dt.min_below_or_self);
         Cost cheapest = std::min(
              {saturating_mul(d.min_source_size, tangent), adjoint, multiply});

         const int sink = dag.vertices()[t].index;
         if (dag.out_edges(sink).empty()) {
            const auto e = dag.find_edge(pivot, sink);
            if (e && open_right[*e] != 0) {
               cheapest = std::min(
                    saturating_mul(d.min_source_size, edge_tangent[*e]),
                    saturating_add(edge_preaccumulation[*e],
                                   std::min(adjoint, multiply)));
            }
         }
         items.emplace_back(t, cheapest);
      }
      const Cost sink_side = packing(items, false);

      bound = saturating_add(bound, std::max(source_side, sink_side));
   }
   return bound;
}

auto lower_bound(const SearchNode& node) -> Cost {
   return LowerBound(node.state.dag())(node.state, node.cost_so_far);
}

auto upper_bound_completion(const SearchNode& node) -> Plan {
   LineDag state = node.state;
   Plan plan;
   greedy_completion(state, &plan);
   return plan;
}

auto solve_branch_and_bound(const Dag& dag, const BranchAndBoundOptions& options)
     -> PlanReport {
   return Search(dag, options).run();
}

}  // namespace admission
