#include "admission/session.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "admission/branch_and_bound.hpp"
#include "admission/chain_dp.hpp"
#include "admission/error.hpp"
#include "admission/graphml.hpp"
#include "admission/heuristics.hpp"

namespace admission {

namespace {

constexpr std::array<std::string_view, 7> known_methods {
     "DenseTangent",  "DenseAdjoint",   "SparseTangent", "SparseAdjoint",
     "GreedyMinFill", "BranchAndBound", "ChainDP"};

auto trim(std::string_view s) -> std::string_view {
   const auto first = s.find_first_not_of(" \t\r");
   if (first == std::string_view::npos) {
      return {};
   }
   const auto last = s.find_last_not_of(" \t\r");
   return s.substr(first, last - first + 1);
}

template <typename T>
auto parse_number(std::string_view key, std::string_view value, std::size_t line)
     -> T {
   T result {};
   const auto* end = value.data() + value.size();
   const auto [ptr, ec] = std::from_chars(value.data(), end, result);
   if (ec != std::errc {} || ptr != end) {
      throw ConfigError(fmt::format("line {}: invalid value '{}' for '{}'", line,
                                    value, key));
   }
   return result;
}

auto read_file(const std::filesystem::path& path) -> std::string {
   std::ifstream in(path, std::ios::binary);
   if (!in) {
      throw ConfigError(fmt::format("cannot read '{}'", path.string()));
   }
   std::ostringstream buffer;
   buffer << in.rdbuf();
   return buffer.str();
}

auto heuristic_report(const Dag& dag, std::string method, Plan plan) -> PlanReport {
   PlanReport report;
   report.method = std::move(method);
   report.dense_tangent_cost = dense_tangent_cost(dag);
   report.dense_adjoint_cost = dense_adjoint_cost(dag);
   report.total_cost = plan.total_cost();
   report.plan = std::move(plan);
   return report;
}

}  // namespace

auto parse_session_config(std::string_view text,
                          const std::filesystem::path& base_dir) -> SessionConfig {
   SessionConfig config;
   std::set<std::string, std::less<>> seen;
   std::size_t line_number = 0;
   std::istringstream in {std::string(text)};
   for (std::string raw; std::getline(in, raw);) {
      ++line_number;
      std::string_view line = raw;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
         line = line.substr(0, hash);
      }
      line = trim(line);
      if (line.empty()) {
         continue;
      }
      const auto split = line.find_first_of(" \t");
      const std::string_view key = line.substr(0, split);
      const std::string_view value =
           split == std::string_view::npos ? std::string_view {}
                                           : trim(line.substr(split));
      if (value.empty()) {
         throw ConfigError(fmt::format("line {}: '{}' has no value", line_number, key));
      }
      if (!seen.emplace(key).second) {
         throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_number, key));
      }

      if (key == "dag") {
         config.dag_path = std::filesystem::path(std::string(value));
         if (config.dag_path.is_relative() && !base_dir.empty()) {
            config.dag_path = base_dir / config.dag_path;
         }
      } else if (key == "method") {
         config.method = value;
      } else if (key == "time_limit_s") {
         const auto limit = parse_number<double>(key, value, line_number);
         if (!(limit > 0.0)) {
            throw ConfigError(
                 fmt::format("line {}: time_limit_s must be positive", line_number));
         }
         config.time_limit_s = limit;
      } else if (key == "threads") {
         config.threads = parse_number<std::size_t>(key, value, line_number);
         if (config.threads == 0) {
            throw ConfigError(
                 fmt::format("line {}: threads must be positive", line_number));
         }
      } else if (key == "seed") {
         config.seed = parse_number<std::uint64_t>(key, value, line_number);
      } else if (key == "verify") {
         config.verify_trials = parse_number<std::size_t>(key, value, line_number);
      } else {
         throw ConfigError(fmt::format("line {}: unknown key '{}'", line_number, key));
      }
   }
   if (!seen.contains("dag")) {
      throw ConfigError("missing 'dag' line");
   }
   if (!seen.contains("method")) {
      throw ConfigError("missing 'method' line");
   }
   return config;
}

auto load_session_config(const std::filesystem::path& path) -> SessionConfig {
   return parse_session_config(read_file(path), path.parent_path());
}

auto is_known_method(std::string_view method) -> bool {
   return std::ranges::find(known_methods, method) != known_methods.end();
}

auto load_session_input(const std::filesystem::path& path) -> SessionInput {
   std::ifstream in(path, std::ios::binary);
   if (!in) {
      throw InvalidDag(fmt::format("cannot read dag file '{}'", path.string()));
   }
   std::ostringstream buffer;
   buffer << in.rdbuf();
   std::string text = buffer.str();

   const auto first = text.find_first_not_of(" \t\r\n");
   if (first != std::string::npos && text[first] == '<') {
      return SessionInput {parse_graphml(text), std::nullopt};
   }
   Dag dag = chain_as_dag(parse_chain_spec(text));
   return SessionInput {std::move(dag), std::move(text)};
}

auto run_method(const SessionInput& input, const SessionConfig& config)
     -> PlanReport {
   const Dag& dag = input.dag;
   const auto start = std::chrono::steady_clock::now();
   PlanReport report;

   if (config.method == "DenseTangent" || config.method == "DenseAdjoint") {
      report.method = config.method;
      report.dense_tangent_cost = dense_tangent_cost(dag);
      report.dense_adjoint_cost = dense_adjoint_cost(dag);
      report.total_cost = config.method == "DenseTangent" ? report.dense_tangent_cost
                                                          : report.dense_adjoint_cost;
   } else if (config.method == "SparseTangent") {
      report = heuristic_report(dag, config.method, plan_sparse_tangent(dag));
   } else if (config.method == "SparseAdjoint") {
      report = heuristic_report(dag, config.method, plan_sparse_adjoint(dag));
   } else if (config.method == "GreedyMinFill") {
      report = heuristic_report(dag, config.method, plan_greedy_min_fill(dag));
   } else if (config.method == "BranchAndBound") {
      BranchAndBoundOptions options;
      options.time_limit_s = config.time_limit_s;
      options.workers = config.threads;
      options.seed = config.seed;
      report = solve_branch_and_bound(dag, options);
   } else if (config.method == "ChainDP") {
      const ChainSpec spec =
           input.chain_text ? parse_chain_spec(*input.chain_text) : chain_from_dag(dag);
      const ChainOptimum optimum = optimize_chain(spec);
      report = heuristic_report(dag, config.method,
                                strategy_plan(spec, *optimum.strategy));
      report.optimal = true;
      report.chain_strategy = render_strategy(*optimum.strategy);
   } else {
      throw UnknownMethod(fmt::format("unknown method '{}'", config.method));
   }

   report.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
   return report;
}

auto render_report(const PlanReport& report, const std::optional<Verdict>& verdict)
     -> std::string {
   std::string out = fmt::format("elapsed time: {}s\n\n", report.elapsed_s);
   out += fmt::format("method: {}\n\n", report.method);

   if (report.plan) {
      out += "elimination sequence \n  (operation mode target cost):\n";
      for (const PlanStep& step : report.plan->steps) {
         out += fmt::format("  {}\n", render_step(step));
      }
      out += '\n';
   }
   if (report.chain_strategy) {
      out += fmt::format("chain strategy: {}\n\n", *report.chain_strategy);
   }

   out += fmt::format("dense tangent cost: {}\n", report.dense_tangent_cost);
   out += fmt::format("dense adjoint cost: {}\n", report.dense_adjoint_cost);
   out += fmt::format("optimized cost: {}\n", report.total_cost);
   if (report.optimal) {
      out += "optimal: yes\n";
   } else if (report.stats) {
      out += "optimal: no (budget)\n";
   } else {
      out += "optimal: no (heuristic)\n";
   }

   if (report.stats) {
      const SearchStats& stats = *report.stats;
      out += "\nbranch and bound statistics:\n";
      out += fmt::format("  number of nodes in search space: {}\n", stats.nodes_generated);
      out += fmt::format("  number of nodes visited: {}\n", stats.nodes_visited);
      out += fmt::format("  number of nodes pruned: {}\n", stats.nodes_pruned);
      std::string history;
      for (const auto& [when, cost] : stats.incumbent_history) {
         history += fmt::format(" {}", cost);
      }
      out += fmt::format("  incumbent improvements:{}\n", history);
   }

   if (verdict) {
      out += '\n';
      if (!verdict->failure.empty()) {
         out += fmt::format("verification: FAIL ({})\n", verdict->failure);
      } else {
         out += fmt::format(
              "verification: {} ({} trials, worst relative error {:.3g} at seed {})\n",
              verdict->pass ? "PASS" : "FAIL", verdict->trials, verdict->worst_error,
              verdict->worst_seed);
      }
   }
   return out;
}

auto run_session(const std::filesystem::path& config_path) -> SessionOutcome {
   SessionOutcome outcome;
   SessionConfig config;
   try {
      config = load_session_config(config_path);
   } catch (const Error& e) {
      outcome.exit_code = ExitCode::ConfigError;
      outcome.error = fmt::format("config error: {}", e.what());
      return outcome;
   }
   if (!is_known_method(config.method)) {
      outcome.exit_code = ExitCode::UnknownMethod;
      outcome.error = fmt::format("unknown method '{}'", config.method);
      return outcome;
   }

   SessionInput input;
   try {
      input = load_session_input(config.dag_path);
   } catch (const Error& e) {
      outcome.exit_code = ExitCode::DagError;
      outcome.error = fmt::format("dag error: {}", e.what());
      return outcome;
   }

   PlanReport report;
   try {
      report = run_method(input, config);
   } catch (const InvalidDag& e) {
      outcome.exit_code = ExitCode::DagError;
      outcome.error = fmt::format("dag error: {}", e.what());
      return outcome;
   } catch (const ParseError& e) {
      outcome.exit_code = ExitCode::DagError;
      outcome.error = fmt::format("dag error: {}", e.what());
      return outcome;
   }

   std::optional<Verdict> verdict;
   if (config.verify_trials > 0 && report.plan) {
      verdict = verify_plan(input.dag, *report.plan, config.verify_trials);
      if (!verdict->pass) {
         outcome.exit_code = ExitCode::VerificationFailure;
      }
   }
   outcome.report = render_report(report, verdict);
   return outcome;
}

}  // namespace admission
