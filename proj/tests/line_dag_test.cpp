#include <gtest/gtest.h>

#include <random>
#include <set>

#include "admission/elimination.hpp"
#include "admission/heuristics.hpp"
#include "admission/line_dag.hpp"
#include "support/fixtures.hpp"
#include "support/random_dag.hpp"

namespace admission {
namespace {

using testing::fixture;
using testing::random_dag;
using LabelEdge = std::pair<PathLabel, PathLabel>;

struct EdgeCounts {
   std::size_t from_inputs {0};
   std::size_t between {0};
   std::size_t into_outputs {0};
};

auto count_edges(const LineDag& ld) -> EdgeCounts {
   EdgeCounts counts;
   for (VertexId v = 0; v < ld.slots(); ++v) {
      const LineVertex& lv = ld.vertex(v);
      if (!lv.alive) {
         continue;
      }
      for (const VertexId s : lv.succs) {
         const Part to = ld.vertex(s).part;
         if (lv.part == Part::Input) {
            ++counts.from_inputs;
         } else if (to == Part::Output) {
            ++counts.into_outputs;
         } else {
            ++counts.between;
         }
      }
   }
   return counts;
}

auto intermediate_label_edges(const LineDag& ld) -> std::set<LabelEdge> {
   std::set<LabelEdge> out;
   for (const auto& [a, b] : ld.intermediate_edges()) {
      out.emplace(ld.vertex(a).label, ld.vertex(b).label);
   }
   return out;
}

//! Composable pairs ((i,j),(j,k)) straight from the edge list.
auto composable_pairs(const Dag& dag) -> std::set<LabelEdge> {
   std::set<LabelEdge> out;
   for (const DagEdge& a : dag.edges()) {
      for (const DagEdge& b : dag.edges()) {
         if (a.target == b.source) {
            out.emplace(PathLabel {a.source, a.target}, PathLabel {b.source, b.target});
         }
      }
   }
   return out;
}

TEST(BuildLineDag, BatShape) {
   const LineDag ld = build_line_dag(fixture("bat"));
   EXPECT_EQ(ld.inputs().size(), 2U);
   EXPECT_EQ(ld.intermediates().size(), 9U);
   EXPECT_EQ(ld.outputs().size(), 3U);
   const EdgeCounts counts = count_edges(ld);
   EXPECT_EQ(counts.from_inputs, 2U);
   EXPECT_EQ(counts.between, 10U);
   EXPECT_EQ(counts.into_outputs, 5U);
}

TEST(BuildLineDag, LionIntermediateEdges) {
   const LineDag ld = build_line_dag(fixture("lion"));
   EXPECT_EQ(ld.intermediates().size(), 6U);
   const std::set<LabelEdge> expected {
        {{0, 1}, {1, 2}}, {{0, 1}, {1, 3}}, {{1, 2}, {2, 3}},
        {{1, 2}, {2, 4}}, {{1, 2}, {2, 5}}};
   EXPECT_EQ(intermediate_label_edges(ld), expected);
}

TEST(BuildLineDag, SingleEdge) {
   const LineDag ld = build_line_dag(Dag({{0, 1}, {1, 1}}, {{0, 1, 1, 1, false}}));
   ASSERT_EQ(ld.intermediates().size(), 1U);
   EXPECT_EQ(ld.vertex(ld.intermediates()[0]).label, (PathLabel {0, 1}));
   EXPECT_FALSE(ld.has_intermediate_edges());
}

TEST(BuildLineDag, MatchesDefinitionOnRandomDags) {
   for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      const Dag dag = random_dag(seed, {.intermediates = 5, .explicit_jacobian = 0.3});
      const LineDag ld = build_line_dag(dag);
      EXPECT_EQ(ld.intermediates().size(), dag.edges().size());
      EXPECT_EQ(intermediate_label_edges(ld), composable_pairs(dag));
      EXPECT_EQ(ld.inputs().size(), dag.inputs().size());
      EXPECT_EQ(ld.outputs().size(), dag.outputs().size());
      for (const VertexId v : ld.intermediates()) {
         const LineVertex& lv = ld.vertex(v);
         const DagEdge& e = dag.edges()[*dag.find_edge(lv.source(), lv.sink())];
         EXPECT_EQ(lv.jacobian_present, e.has_jacobian);
         EXPECT_EQ(lv.tangent_cost, e.tangent_cost);
         EXPECT_EQ(lv.adjoint_cost, e.adjoint_cost);
         EXPECT_EQ(lv.rows, dag.vector_size(lv.sink()));
         EXPECT_EQ(lv.cols, dag.vector_size(lv.source()));
      }
   }
}

TEST(IsComplete, FreshLionIsNot) {
   EXPECT_FALSE(is_complete(build_line_dag(fixture("lion"))));
}

TEST(IsComplete, BipartiteWithJacobiansIs) {
   const Dag dag({{0, 2}, {1, 1}, {2, 3}},
                 {{0, 2, 1, 1, true}, {1, 2, 1, 1, true}});
   EXPECT_TRUE(is_complete(build_line_dag(dag)));
}

TEST(IsComplete, BipartiteWithoutJacobianIsNot) {
   const Dag dag({{0, 2}, {2, 3}}, {{0, 2, 1, 1, false}});
   EXPECT_FALSE(is_complete(build_line_dag(dag)));
}

TEST(IsComplete, LionAfterSparseTangent) {
   const Dag lion = fixture("lion");
   EXPECT_TRUE(replay_sequence(lion, plan_sparse_tangent(lion)).complete);
}

TEST(EliminatableTargets, GeneralizedBatNeedsPreaccumulation) {
   const LineDag ld = build_line_dag(fixture("bat"));
   const auto actions = eliminatable_targets(ld);
   std::set<std::pair<VertexId, VertexId>> fused_edges;
   for (const Action& a : actions) {
      ASSERT_EQ(a.kind, Action::Kind::Eliminate);
      EXPECT_TRUE(a.fused());
      fused_edges.emplace(a.left, a.right);
   }
   EXPECT_EQ(fused_edges.size(), 10U);
}

TEST(EliminatableTargets, ClassicalBatOffersAllFlavors) {
   const LineDag ld = build_line_dag(fixture("bat_classical"));
   std::set<std::tuple<VertexId, VertexId, Mode>> seen;
   for (const Action& a : eliminatable_targets(ld)) {
      EXPECT_FALSE(a.fused());
      seen.emplace(a.left, a.right, a.mode);
   }
   EXPECT_EQ(seen.size(), 30U);
   for (const auto& [l, r] : ld.intermediate_edges()) {
      for (const Mode m : {Mode::Tangent, Mode::Adjoint, Mode::Multiply}) {
         EXPECT_TRUE(seen.contains({l, r, m}));
      }
   }
}

TEST(EliminatableTargets, DirectFlavorsFollowAvailability) {
   for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const LineDag ld =
           build_line_dag(random_dag(seed, {.explicit_jacobian = 0.5}));
      for (const Action& a : eliminatable_targets(ld)) {
         if (a.kind != Action::Kind::Eliminate || a.fused()) {
            continue;
         }
         const LineVertex& l = ld.vertex(a.left);
         const LineVertex& r = ld.vertex(a.right);
         switch (a.mode) {
            case Mode::Tangent:
               EXPECT_TRUE(l.jacobian_present && r.tangent_cost.has_value());
               break;
            case Mode::Adjoint:
               EXPECT_TRUE(r.jacobian_present && l.adjoint_cost.has_value());
               break;
            case Mode::Multiply:
               EXPECT_TRUE(l.jacobian_present && r.jacobian_present);
               break;
         }
      }
   }
}

TEST(EliminatableTargets, CompleteStateOffersNoElimination) {
   for (const char* name : {"lion", "bat", "newton1"}) {
      const Dag dag = fixture(name);
      const LineDag done = replay_sequence(dag, plan_greedy_min_fill(dag)).final_state;
      for (const Action& a : eliminatable_targets(done)) {
         EXPECT_NE(a.kind, Action::Kind::Eliminate) << name;
      }
   }
}

TEST(EliminatableTargets, FinalizationOnlyWithoutIntermediateEdges) {
   const Dag dag({{0, 2}, {1, 1}, {2, 3}},
                 {{0, 2, 1, 1, false}, {1, 2, 1, 1, true}});
   const auto actions = eliminatable_targets(build_line_dag(dag));
   ASSERT_EQ(actions.size(), 1U);
   EXPECT_EQ(actions[0].kind, Action::Kind::Finalize);
}

TEST(LineDagInvariants, TerminalSetsNeverChange) {
   for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const Dag dag = random_dag(seed, {.explicit_jacobian = 0.3});
      LineDag ld = build_line_dag(dag);
      auto terminals = [](const LineDag& g) {
         std::set<PathLabel> out;
         for (const VertexId v : g.inputs()) {
            out.insert(g.vertex(v).label);
         }
         for (const VertexId v : g.outputs()) {
            out.insert(g.vertex(v).label);
         }
         return out;
      };
      const auto before = terminals(ld);
      std::mt19937_64 rng(seed);
      for (auto actions = eliminatable_targets(ld); !actions.empty();
           actions = eliminatable_targets(ld)) {
         apply_action(ld, actions[rng() % actions.size()]);
         EXPECT_EQ(terminals(ld), before);
      }
      EXPECT_TRUE(is_complete(ld));
   }
}

TEST(CanonicalForm, IgnoresConstructionHistory) {
   const Dag lion = fixture("lion");
   LineDag a = build_line_dag(lion);
   LineDag b = build_line_dag(lion);
   EXPECT_EQ(a.canonical_form(), b.canonical_form());
   apply_action(a, eliminatable_targets(a).front());
   EXPECT_NE(a.canonical_form(), b.canonical_form());
}

TEST(FormatLabel, SpaceSeparated) {
   EXPECT_EQ(format_label({0, 1, 2}), "(0 1 2)");
   EXPECT_EQ(format_label({-1}), "(-1)");
}

}  // namespace
}  // namespace admission
