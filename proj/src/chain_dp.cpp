#include "admission/chain_dp.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "admission/error.hpp"

namespace admission {

namespace {

using Kind = ChainStrategy::Kind;

auto make(Kind kind, std::size_t first, std::size_t last, std::size_t split = 0,
          ChainStrategyPtr left = nullptr, ChainStrategyPtr right = nullptr)
     -> ChainStrategyPtr {
   return std::make_shared<const ChainStrategy>(
        ChainStrategy {kind, first, last, split, std::move(left),
                       std::move(right)});
}

//! Sums of T_l and A_l over l in [first, last].
class CostSums {
 public:
   explicit CostSums(const ChainSpec& spec) {
      m_tangent.push_back(0);
      m_adjoint.push_back(0);
      for (std::size_t l = 0; l < spec.q(); ++l) {
         m_tangent.push_back(m_tangent.back() + spec.tangent_costs[l]);
         m_adjoint.push_back(m_adjoint.back() + spec.adjoint_costs[l]);
      }
   }
   [[nodiscard]] auto tangent(std::size_t first, std::size_t last) const
        -> Cost {
      return m_tangent[last] - m_tangent[first - 1];
   }
   [[nodiscard]] auto adjoint(std::size_t first, std::size_t last) const
        -> Cost {
      return m_adjoint[last] - m_adjoint[first - 1];
   }

 private:
   std::vector<Cost> m_tangent;
   std::vector<Cost> m_adjoint;
};

auto label(const ChainSpec& spec, std::size_t from, std::size_t to)
     -> PathLabel {
   PathLabel out;
   for (std::size_t v = from; v <= to; ++v) {
      out.push_back(spec.index(v));
   }
   return out;
}

auto as_cost(std::size_t value) -> Cost {
   return static_cast<Cost>(value);
}

auto append_plan(const ChainSpec& spec, const ChainStrategy& s, Plan& plan)
     -> void {
   const auto& d = spec.dims;
   const auto& tangent = spec.tangent_costs;
   const auto& adjoint = spec.adjoint_costs;
   auto eliminate = [&](Mode mode, std::size_t from, std::size_t to,
                        Cost cost) {
      plan.steps.push_back(
           {PlanStep::Kind::Eliminate, mode, label(spec, from, to), cost});
   };

   switch (s.kind) {
      case Kind::TangentSweep:
         plan.steps.push_back({PlanStep::Kind::Accumulate, Mode::Tangent,
                               label(spec, s.first - 1, s.first),
                               as_cost(d[s.first - 1]) * tangent[s.first - 1]});
         for (std::size_t l = s.first + 1; l <= s.last; ++l) {
            eliminate(Mode::Tangent, s.first - 1, l,
                      as_cost(d[s.first - 1]) * tangent[l - 1]);
         }
         break;
      case Kind::AdjointSweep:
         plan.steps.push_back({PlanStep::Kind::Accumulate, Mode::Adjoint,
                               label(spec, s.last - 1, s.last),
                               as_cost(d[s.last]) * adjoint[s.last - 1]});
         for (std::size_t l = s.last - 1; l >= s.first; --l) {
            eliminate(Mode::Adjoint, l - 1, s.last,
                      as_cost(d[s.last]) * adjoint[l - 1]);
         }
         break;
      case Kind::Product:
         append_plan(spec, *s.left, plan);
         append_plan(spec, *s.right, plan);
         eliminate(Mode::Multiply, s.first - 1, s.last,
                   as_cost(d[s.first - 1]) * d[s.split] * d[s.last]);
         break;
      case Kind::TangentPropagate:
         append_plan(spec, *s.left, plan);
         for (std::size_t l = s.split + 1; l <= s.last; ++l) {
            eliminate(Mode::Tangent, s.first - 1, l,
                      as_cost(d[s.first - 1]) * tangent[l - 1]);
         }
         break;
      case Kind::AdjointPropagate:
         append_plan(spec, *s.right, plan);
         for (std::size_t l = s.split; l >= s.first; --l) {
            eliminate(Mode::Adjoint, l - 1, s.last,
                      as_cost(d[s.last]) * adjoint[l - 1]);
         }
         break;
   }
}

auto enumerate(const ChainSpec& spec, const CostSums& sums, std::size_t first,
               std::size_t last,
               std::vector<std::vector<std::vector<ChainStrategyPtr>>>& memo)
     -> const std::vector<ChainStrategyPtr>& {
   auto& slot = memo[first][last];
   if (!slot.empty()) {
      return slot;
   }
   slot.push_back(make(Kind::TangentSweep, first, last));
   slot.push_back(make(Kind::AdjointSweep, first, last));
   for (std::size_t k = first; k < last; ++k) {
      const auto& prefixes = enumerate(spec, sums, first, k, memo);
      const auto& suffixes = enumerate(spec, sums, k + 1, last, memo);
      for (const auto& l : prefixes) {
         for (const auto& r : suffixes) {
            slot.push_back(make(Kind::Product, first, last, k, l, r));
         }
      }
      for (const auto& l : prefixes) {
         if (l->kind != Kind::TangentSweep && l->kind != Kind::TangentPropagate) {
            slot.push_back(make(Kind::TangentPropagate, first, last, k, l));
         }
      }
      for (const auto& r : suffixes) {
         if (r->kind != Kind::AdjointSweep && r->kind != Kind::AdjointPropagate) {
            slot.push_back(
                 make(Kind::AdjointPropagate, first, last, k, nullptr, r));
         }
      }
   }
   return slot;
}

auto parse_numbers(const std::string& line, std::size_t line_number)
     -> std::vector<long long> {
   std::istringstream in(line);
   std::vector<long long> out;
   std::string token;
   while (in >> token) {
      std::size_t used = 0;
      long long value = 0;
      try {
         value = std::stoll(token, &used);
      } catch (const std::exception&) {
         used = 0;
      }
      if (used != token.size()) {
         throw ParseError(fmt::format("chain spec line {}: '{}' is not an integer",
                                      line_number, token));
      }
      if (value < 0) {
         throw ParseError(fmt::format("chain spec line {}: negative value {}",
                                      line_number, value));
      }
      out.push_back(value);
   }
   return out;
}

}  // namespace

auto validate_chain(const ChainSpec& spec) -> void {
   const std::size_t q = spec.q();
   if (q == 0) {
      throw InvalidDag("chain needs at least one elemental");
   }
   if (spec.adjoint_costs.size() != q || spec.dims.size() != q + 1) {
      throw InvalidDag(fmt::format(
           "chain with {} tangent costs needs {} adjoint costs and {} dims",
           q, q, q + 1));
   }
   if (!spec.indices.empty() && spec.indices.size() != q + 1) {
      throw InvalidDag("chain vertex indices do not match its length");
   }
   if (std::ranges::find(spec.dims, 0U) != spec.dims.end()) {
      throw InvalidDag("chain dims must be positive");
   }
}

auto strategy_cost(const ChainSpec& spec, const ChainStrategy& s) -> Cost {
   const CostSums sums(spec);
   const auto& d = spec.dims;
   switch (s.kind) {
      case Kind::TangentSweep:
         return as_cost(d[s.first - 1]) * sums.tangent(s.first, s.last);
      case Kind::AdjointSweep:
         return as_cost(d[s.last]) * sums.adjoint(s.first, s.last);
      case Kind::Product:
         return strategy_cost(spec, *s.left) + strategy_cost(spec, *s.right) +
                as_cost(d[s.first - 1]) * d[s.split] * d[s.last];
      case Kind::TangentPropagate:
         return strategy_cost(spec, *s.left) +
                as_cost(d[s.first - 1]) * sums.tangent(s.split + 1, s.last);
      case Kind::AdjointPropagate:
         return strategy_cost(spec, *s.right) +
                as_cost(d[s.last]) * sums.adjoint(s.first, s.split);
   }
   return 0;
}

auto render_strategy(const ChainStrategy& s) -> std::string {
   auto range = [](std::size_t a, std::size_t b) {
      return a == b ? fmt::format("[{}]", a) : fmt::format("[{}..{}]", a, b);
   };
   switch (s.kind) {
      case Kind::TangentSweep:
         return "tan" + range(s.first, s.last);
      case Kind::AdjointSweep:
         return "adj" + range(s.first, s.last);
      case Kind::Product:
         return fmt::format("mul({}, {})", render_strategy(*s.left),
                            render_strategy(*s.right));
      case Kind::TangentPropagate:
         return fmt::format("tanprop({}; {})", render_strategy(*s.left),
                            range(s.split + 1, s.last));
      case Kind::AdjointPropagate:
         return fmt::format("adjprop({}; {})", range(s.first, s.split),
                            render_strategy(*s.right));
   }
   return {};
}

auto strategy_plan(const ChainSpec& spec, const ChainStrategy& strategy)
     -> Plan {
   Plan plan;
   append_plan(spec, strategy, plan);
   return plan;
}

auto optimize_chain(const ChainSpec& spec) -> ChainOptimum {
   validate_chain(spec);
   const std::size_t q = spec.q();
   const auto& d = spec.dims;
   const CostSums sums(spec);

   std::vector<std::vector<ChainOptimum>> best(q + 1,
                                               std::vector<ChainOptimum>(q + 1));
   for (std::size_t length = 1; length <= q; ++length) {
      for (std::size_t i = 1; i + length - 1 <= q; ++i) {
         const std::size_t j = i + length - 1;
         ChainOptimum& cell = best[i][j];
         cell = {as_cost(d[i - 1]) * sums.tangent(i, j),
                 make(Kind::TangentSweep, i, j)};
         auto consider = [&cell](Cost cost, auto&& build) {
            if (cost < cell.cost) {
               cell = {cost, build()};
            }
         };
         consider(as_cost(d[j]) * sums.adjoint(i, j),
                  [&] { return make(Kind::AdjointSweep, i, j); });
         for (std::size_t k = i; k < j; ++k) {
            const ChainOptimum& prefix = best[i][k];
            const ChainOptimum& suffix = best[k + 1][j];
            consider(prefix.cost + suffix.cost + as_cost(d[i - 1]) * d[k] * d[j],
                     [&] {
                        return make(Kind::Product, i, j, k, prefix.strategy,
                                    suffix.strategy);
                     });
            consider(prefix.cost + as_cost(d[i - 1]) * sums.tangent(k + 1, j), [&] {
               return make(Kind::TangentPropagate, i, j, k, prefix.strategy);
            });
            consider(suffix.cost + as_cost(d[j]) * sums.adjoint(i, k), [&] {
               return make(Kind::AdjointPropagate, i, j, k, nullptr,
                           suffix.strategy);
            });
         }
      }
   }
   return best[1][q];
}

auto enumerate_chain_strategies(const ChainSpec& spec)
     -> std::vector<std::pair<ChainStrategyPtr, Cost>> {
   validate_chain(spec);
   const std::size_t q = spec.q();
   if (q > max_enumerated_chain) {
      throw ChainTooLong(fmt::format(
           "exhaustive enumeration is limited to {} elementals, got {}",
           max_enumerated_chain, q));
   }
   const CostSums sums(spec);
   std::vector<std::vector<std::vector<ChainStrategyPtr>>> memo(
        q + 1, std::vector<std::vector<ChainStrategyPtr>>(q + 1));
   std::vector<std::pair<ChainStrategyPtr, Cost>> out;
   for (const auto& s : enumerate(spec, sums, 1, q, memo)) {
      out.emplace_back(s, strategy_cost(spec, *s));
   }
   return out;
}

auto chain_as_dag(const ChainSpec& spec) -> Dag {
   validate_chain(spec);
   std::vector<DagVertex> vertices;
   for (std::size_t v = 0; v <= spec.q(); ++v) {
      vertices.push_back({spec.index(v), spec.dims[v]});
   }
   std::vector<DagEdge> edges;
   for (std::size_t l = 1; l <= spec.q(); ++l) {
      edges.push_back({spec.index(l - 1), spec.index(l),
                       spec.tangent_costs[l - 1], spec.adjoint_costs[l - 1]});
   }
   return {std::move(vertices), std::move(edges)};
}

auto chain_from_dag(const Dag& dag) -> ChainSpec {
   const auto inputs = dag.inputs();
   const auto outputs = dag.outputs();
   if (inputs.size() != 1 || outputs.size() != 1 || dag.edges().empty()) {
      throw InvalidDag("not a chain: needs exactly one input and one output");
   }

   ChainSpec spec;
   int v = inputs.front();
   spec.indices.push_back(v);
   spec.dims.push_back(dag.vector_size(v));
   while (v != outputs.front()) {
      const auto out = dag.out_edges(v);
      if (out.size() != 1 || dag.in_edges(dag.edges()[out.front()].target).size() != 1) {
         throw InvalidDag(fmt::format("not a chain: vertex {} branches", v));
      }
      const DagEdge& e = dag.edges()[out.front()];
      spec.tangent_costs.push_back(e.tangent_cost);
      spec.adjoint_costs.push_back(e.adjoint_cost);
      v = e.target;
      spec.indices.push_back(v);
      spec.dims.push_back(dag.vector_size(v));
   }
   if (spec.q() != dag.edges().size() ||
       spec.indices.size() != dag.vertices().size()) {
      throw InvalidDag("not a chain: edges off the input-output path");
   }
   return spec;
}

auto reverse_chain(const ChainSpec& spec) -> ChainSpec {
   ChainSpec out;
   out.dims.assign(spec.dims.rbegin(), spec.dims.rend());
   out.tangent_costs.assign(spec.adjoint_costs.rbegin(),
                            spec.adjoint_costs.rend());
   out.adjoint_costs.assign(spec.tangent_costs.rbegin(),
                            spec.tangent_costs.rend());
   return out;
}

auto parse_chain_spec(std::string_view text) -> ChainSpec {
   std::vector<std::pair<std::size_t, std::string>> lines;
   std::istringstream in {std::string(text)};
   std::string line;
   for (std::size_t number = 1; std::getline(in, line); ++number) {
      if (const auto hash = line.find('#'); hash != std::string::npos) {
         line.erase(hash);
      }
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
         lines.emplace_back(number, line);
      }
   }
   if (lines.size() != 4) {
      throw ParseError(fmt::format(
           "chain spec needs 4 lines (q, dims, tangent costs, adjoint costs), "
           "got {}",
           lines.size()));
   }

   const auto q_line = parse_numbers(lines[0].second, lines[0].first);
   if (q_line.size() != 1 || q_line.front() < 1) {
      throw ParseError(fmt::format("chain spec line {}: expected q >= 1",
                                   lines[0].first));
   }
   const auto q = static_cast<std::size_t>(q_line.front());
   auto row = [&](std::size_t k, std::size_t expected, const char* what) {
      auto values = parse_numbers(lines[k].second, lines[k].first);
      if (values.size() != expected) {
         throw ParseError(fmt::format("chain spec line {}: expected {} {}, got {}",
                                      lines[k].first, expected, what,
                                      values.size()));
      }
      return values;
   };

   ChainSpec spec;
   for (const long long d : row(1, q + 1, "dims")) {
      if (d == 0) {
         throw ParseError(fmt::format("chain spec line {}: dims must be positive",
                                      lines[1].first));
      }
      spec.dims.push_back(static_cast<std::size_t>(d));
   }
   for (const long long t : row(2, q, "tangent costs")) {
      spec.tangent_costs.push_back(static_cast<Cost>(t));
   }
   for (const long long a : row(3, q, "adjoint costs")) {
      spec.adjoint_costs.push_back(static_cast<Cost>(a));
   }
   return spec;
}

}  // namespace admission
