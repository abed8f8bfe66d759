#include <gtest/gtest.h>

#include <map>
#include <random>

#include "admission/branch_and_bound.hpp"
#include "admission/heuristics.hpp"
#include "support/exhaustive.hpp"
#include "support/fixtures.hpp"
#include "support/random_dag.hpp"

namespace admission {
namespace {

using testing::exhaustive_optimum;
using testing::fixture;
using testing::random_dag;
using testing::RandomDagShape;

constexpr RandomDagShape tiny {.inputs = 2, .intermediates = 3, .outputs = 2,
                               .max_size = 3, .max_cost = 6, .density = 0.1,
                               .explicit_jacobian = 0.3};

//! Small enough for the unpruned exhaustive oracle.
constexpr RandomDagShape exhaustible {.inputs = 2, .intermediates = 2, .outputs = 2,
                                      .max_size = 3, .max_cost = 6, .density = 0.2,
                                      .explicit_jacobian = 0.3};

auto solve(const Dag& dag, BranchAndBoundOptions options = {}) -> PlanReport {
   return solve_branch_and_bound(dag, options);
}

auto expect_consistent(const Dag& dag, const PlanReport& report) -> void {
   ASSERT_TRUE(report.plan.has_value());
   ASSERT_TRUE(report.stats.has_value());
   const auto replay = replay_sequence(dag, *report.plan);
   EXPECT_TRUE(replay.complete);
   EXPECT_EQ(replay.total_cost, report.total_cost);
   EXPECT_EQ(report.plan->total_cost(), report.total_cost);
   EXPECT_EQ(report.stats->incumbent_cost, report.total_cost);
   EXPECT_LE(report.stats->nodes_visited, report.stats->nodes_generated);
   EXPECT_LE(report.stats->nodes_visited + report.stats->nodes_pruned,
             report.stats->nodes_generated);
   EXPECT_EQ(report.optimal, report.stats->proven_optimal);
}

TEST(BranchAndBound, Lion) {
   const Dag dag = fixture("lion");
   const PlanReport report = solve(dag);
   expect_consistent(dag, report);
   EXPECT_EQ(report.total_cost, 16U);
   EXPECT_TRUE(report.optimal);
   EXPECT_EQ(report.method, "BranchAndBound");
   EXPECT_EQ(report.dense_tangent_cost, 16U);
   EXPECT_EQ(report.dense_adjoint_cost, 64U);
}

TEST(BranchAndBound, NewtonStep) {
   const Dag dag = fixture("newton1");
   const PlanReport report = solve(dag);
   expect_consistent(dag, report);
   EXPECT_EQ(report.total_cost, 74000U);
   EXPECT_TRUE(report.optimal);
   EXPECT_LT(report.elapsed_s, 60.0);
}

TEST(BranchAndBound, Bat) {
   const Dag dag = fixture("bat");
   const PlanReport report = solve(dag);
   expect_consistent(dag, report);
   EXPECT_EQ(report.total_cost, 32U);
   EXPECT_TRUE(report.optimal);
   EXPECT_LT(report.elapsed_s, 60.0);
}

TEST(BranchAndBound, ClassicalVariants) {
   const Dag lion = fixture("lion_classical");
   const PlanReport l = solve(lion);
   expect_consistent(lion, l);
   EXPECT_LE(l.total_cost, 11U);
   EXPECT_TRUE(l.optimal);

   const Dag bat = fixture("bat_classical");
   const PlanReport b = solve(bat);
   expect_consistent(bat, b);
   EXPECT_LE(b.total_cost, 22U);
   EXPECT_TRUE(b.optimal);
}

TEST(BranchAndBound, NeverWorseThanHeuristics) {
   for (const char* name : {"lion", "lion_classical", "bat_classical", "newton1"}) {
      const Dag dag = fixture(name);
      const Cost best = solve(dag).total_cost;
      EXPECT_LE(best, plan_sparse_tangent(dag).total_cost()) << name;
      EXPECT_LE(best, plan_sparse_adjoint(dag).total_cost()) << name;
      EXPECT_LE(best, plan_greedy_min_fill(dag).total_cost()) << name;
   }
}

TEST(BranchAndBound, SingleWorkerIsDeterministic) {
   for (const char* name : {"lion", "bat_classical", "newton1"}) {
      const Dag dag = fixture(name);
      EXPECT_EQ(*solve(dag).plan, *solve(dag).plan) << name;
      BranchAndBoundOptions seeded;
      seeded.seed = 12345;
      EXPECT_EQ(*solve(dag, seeded).plan, *solve(dag, seeded).plan) << name;
   }
}

TEST(BranchAndBound, ScheduleIndependence) {
   for (const char* name : {"lion", "lion_classical", "bat_classical", "newton1", "bat"}) {
      const Dag dag = fixture(name);
      std::map<std::size_t, Cost> costs;
      for (const std::size_t workers : {1U, 2U, 8U}) {
         BranchAndBoundOptions options;
         options.workers = workers;
         const PlanReport report = solve(dag, options);
         expect_consistent(dag, report);
         EXPECT_TRUE(report.optimal) << name << " workers " << workers;
         costs[workers] = report.total_cost;
      }
      EXPECT_EQ(costs[1], costs[2]) << name;
      EXPECT_EQ(costs[1], costs[8]) << name;
   }
}

TEST(BranchAndBound, SeedDoesNotChangeTheOptimum) {
   const Dag dag = fixture("bat_classical");
   const Cost reference = solve(dag).total_cost;
   for (const std::uint64_t seed : {1U, 2U, 99U}) {
      BranchAndBoundOptions options;
      options.seed = seed;
      EXPECT_EQ(solve(dag, options).total_cost, reference) << seed;
   }
}

TEST(BranchAndBound, AgreesWithExhaustiveSearch) {
   std::size_t compared = 0;
   for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      const Dag dag = random_dag(seed, exhaustible);
      BranchAndBoundOptions options;
      options.time_limit_s = 20.0;
      const PlanReport report = solve(dag, options);
      expect_consistent(dag, report);
      if (!report.optimal) {
         continue;
      }
      EXPECT_EQ(report.total_cost, exhaustive_optimum(dag)) << "seed " << seed;
      ++compared;
   }
   EXPECT_EQ(compared, 60U);
}

//! Runs each search variant under a budget and compares the proven ones with
//! the default search. Returns the number of variants that ran out of time.
auto unproven_variants(const Dag& dag, bool with_reference_search,
                       std::uint64_t seed) -> std::size_t {
   const PlanReport fast = solve(dag);
   EXPECT_TRUE(fast.optimal) << seed;

   std::vector<BranchAndBoundOptions> variants(2);
   variants[0].compress_independent = false;
   variants[1].upper_bound_depth = 100;
   if (with_reference_search) {
      variants.emplace_back().memo_limit = 0;
      auto& reference = variants.emplace_back();
      reference.use_lower_bound = false;
      reference.compress_independent = false;
   }
   std::size_t unproven = 0;
   for (BranchAndBoundOptions& options : variants) {
      options.time_limit_s = 10.0;
      const PlanReport report = solve(dag, options);
      if (!report.optimal) {
         ++unproven;
         EXPECT_GE(report.total_cost, fast.total_cost) << seed;
         continue;
      }
      EXPECT_EQ(report.total_cost, fast.total_cost) << seed;
   }
   return unproven;
}

TEST(BranchAndBound, SearchOptionsPreserveTheOptimum) {
   std::size_t unproven = 0;
   for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      unproven += unproven_variants(random_dag(seed, exhaustible), true, seed);
   }
   for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      unproven += unproven_variants(random_dag(seed, tiny), false, seed);
   }
   EXPECT_LE(unproven, 5U);
}

TEST(BranchAndBound, TransposeDuality) {
   std::size_t compared = 0;
   for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Dag dag = random_dag(seed, tiny);
      const PlanReport a = solve(dag);
      const PlanReport b = solve(transpose_dag(dag));
      ASSERT_TRUE(a.optimal && b.optimal) << seed;
      EXPECT_EQ(a.total_cost, b.total_cost) << seed;
      ++compared;
   }
   EXPECT_EQ(compared, 20U);
}

TEST(BranchAndBound, AnytimeOnNewtonTwoSteps) {
   const Dag dag = fixture("newton2");
   BranchAndBoundOptions options;
   options.time_limit_s = 3.0;
   const PlanReport report = solve(dag, options);
   expect_consistent(dag, report);
   EXPECT_FALSE(report.optimal);
   EXPECT_LE(report.total_cost, 162000U);
   EXPECT_LT(report.elapsed_s, 3.0 + 5.0);

   const auto& history = report.stats->incumbent_history;
   ASSERT_FALSE(history.empty());
   for (std::size_t k = 1; k < history.size(); ++k) {
      EXPECT_LE(history[k - 1].first, history[k].first);
      EXPECT_LT(history[k].second, history[k - 1].second);
   }
   EXPECT_EQ(history.back().second, report.total_cost);
}

TEST(LowerBound, NewtonRootWithinKnownRange) {
   const LineDag root = build_line_dag(fixture("newton1"));
   const Cost lb = lower_bound({root, {}, 0});
   EXPECT_GE(lb, 11000U);
   EXPECT_LE(lb, 74000U);
}

TEST(LowerBound, LionRootAdmissible) {
   EXPECT_LE(lower_bound({build_line_dag(fixture("lion")), {}, 0}), 16U);
   EXPECT_LE(lower_bound({build_line_dag(fixture("bat")), {}, 0}), 32U);
   EXPECT_LE(lower_bound({build_line_dag(fixture("bat_classical")), {}, 0}), 22U);
}

TEST(LowerBound, CompleteStateIsCostSoFar) {
   const Dag dag = fixture("lion");
   const Plan plan = plan_sparse_tangent(dag);
   const LineDag done = replay_sequence(dag, plan).final_state;
   EXPECT_EQ(lower_bound({done, plan, plan.total_cost()}), plan.total_cost());
}

TEST(LowerBound, AdmissibleAlongRandomWalks) {
   for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      const Dag dag = random_dag(seed, exhaustible);
      const LowerBound bound(dag);
      std::map<std::string, Cost> memo;
      LineDag state = build_line_dag(dag);
      Cost spent = 0;
      std::mt19937_64 rng(seed);
      while (true) {
         const Cost rest = testing::cheapest_completion(state, memo);
         ASSERT_NE(rest, testing::unreachable);
         EXPECT_LE(bound(state, spent), spent + rest) << "seed " << seed;
         EXPECT_GE(bound(state, spent), spent);
         const auto actions = eliminatable_targets(state);
         if (actions.empty()) {
            break;
         }
         spent += apply_action(state, actions[rng() % actions.size()]);
      }
   }
}

TEST(UpperBound, LionRootCompletes) {
   const Dag dag = fixture("lion");
   const Plan suffix = upper_bound_completion({build_line_dag(dag), {}, 0});
   const auto replay = replay_sequence(dag, suffix);
   EXPECT_TRUE(replay.complete);
   EXPECT_GE(suffix.total_cost(), 16U);
}

TEST(UpperBound, NewtonRootAtMostGreedyValue) {
   const Dag dag = fixture("newton1");
   EXPECT_LE(upper_bound_completion({build_line_dag(dag), {}, 0}).total_cost(), 80000U);
}

TEST(UpperBound, CompleteNodeNeedsNothing) {
   const Dag dag = fixture("bat");
   const Plan plan = plan_sparse_tangent(dag);
   const LineDag done = replay_sequence(dag, plan).final_state;
   EXPECT_TRUE(upper_bound_completion({done, plan, plan.total_cost()}).steps.empty());
}

}  // namespace
}  // namespace admission
