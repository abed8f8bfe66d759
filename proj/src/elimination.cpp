#include "admission/elimination.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <sstream>

#include "admission/error.hpp"

namespace admission {

auto Plan::total_cost() const -> Cost {
   Cost total = 0;
   for (const PlanStep& step : steps) {
      total += step.cost;
   }
   return total;
}

auto render_step(const PlanStep& step) -> std::string {
   return fmt::format("{} {} {} {}",
                      step.kind == PlanStep::Kind::Accumulate ? "ACC" : "ELI",
                      mode_name(step.mode), format_label(step.target),
                      step.cost);
}

auto render_plan(const Plan& plan) -> std::string {
   std::string text;
   for (const PlanStep& step : plan.steps) {
      text += render_step(step);
      text += '\n';
   }
   return text;
}

namespace {

auto parse_mode(const std::string& token) -> Mode {
   if (token == "TAN") {
      return Mode::Tangent;
   }
   if (token == "ADJ") {
      return Mode::Adjoint;
   }
   if (token == "MUL") {
      return Mode::Multiply;
   }
   throw ParseError(fmt::format("unknown mode '{}'", token));
}

auto parse_step(const std::string& line) -> PlanStep {
   const auto open = line.find('(');
   const auto close = line.find(')');
   if (open == std::string::npos || close == std::string::npos ||
       close < open) {
      throw ParseError(fmt::format("plan line '{}': missing label", line));
   }

   std::istringstream head(line.substr(0, open));
   std::string kind;
   std::string mode;
   head >> kind >> mode;

   PlanStep step;
   if (kind == "ACC") {
      step.kind = PlanStep::Kind::Accumulate;
   } else if (kind == "ELI") {
      step.kind = PlanStep::Kind::Eliminate;
   } else {
      throw ParseError(fmt::format("plan line '{}': unknown operation", line));
   }
   step.mode = parse_mode(mode);
   if (step.kind == PlanStep::Kind::Accumulate && step.mode == Mode::Multiply) {
      throw ParseError(fmt::format("plan line '{}': ACC needs TAN or ADJ", line));
   }

   std::istringstream label(line.substr(open + 1, close - open - 1));
   for (int index = 0; label >> index;) {
      step.target.push_back(index);
   }
   if (!label.eof() || step.target.empty()) {
      throw ParseError(fmt::format("plan line '{}': bad label", line));
   }

   std::istringstream tail(line.substr(close + 1));
   std::string cost;
   tail >> cost;
   const auto [end, ec] =
        std::from_chars(cost.data(), cost.data() + cost.size(), step.cost);
   if (cost.empty() || ec != std::errc() || end != cost.data() + cost.size()) {
      throw ParseError(fmt::format("plan line '{}': bad cost", line));
   }
   return step;
}

//! Partner for a merge: another intermediate with identical neighborhoods,
//! both Jacobians present.
auto find_twin(const LineDag& ld, VertexId v) -> std::optional<VertexId> {
   const LineVertex& self = ld.vertex(v);
   if (!self.jacobian_present || self.preds.empty()) {
      return std::nullopt;
   }
   // Every twin is a successor of self's first predecessor.
   for (const VertexId c : ld.vertex(self.preds.front()).succs) {
      const LineVertex& other = ld.vertex(c);
      if (c != v && other.is_intermediate() && other.jacobian_present &&
          other.preds == self.preds && other.succs == self.succs) {
         return c;
      }
   }
   return std::nullopt;
}

//! Once a Jacobian holds more than its own elemental, the elemental tangent
//! and adjoint no longer describe it.
auto drop_models(LineVertex& v) -> void {
   v.tangent_cost.reset();
   v.adjoint_cost.reset();
}

auto merge_into(LineDag& ld, VertexId survivor, VertexId absorbed,
                EliminationObserver* observer) -> void {
   if (observer != nullptr) {
      observer->on_merge(ld, survivor, absorbed);
   }
   drop_models(ld.vertex(survivor));
   ld.remove_vertex(absorbed);
}

auto require_intermediate(const LineDag& ld, VertexId v, const char* role)
     -> void {
   if (v >= ld.slots() || !ld.vertex(v).is_intermediate()) {
      throw NoSuchEdge(fmt::format("{} vertex {} is not an intermediate vertex",
                                   role, v));
   }
}

}  // namespace

auto parse_plan(std::string_view text) -> Plan {
   Plan plan;
   std::istringstream in {std::string(text)};
   for (std::string line; std::getline(in, line);) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') {
         continue;
      }
      plan.steps.push_back(parse_step(line.substr(first)));
   }
   return plan;
}

auto elimination_cost(const LineDag& ld, VertexId left, VertexId right,
                      Mode mode) -> Cost {
   const LineVertex& l = ld.vertex(left);
   const LineVertex& r = ld.vertex(right);
   switch (mode) {
      case Mode::Tangent:
         return l.cols * r.tangent_cost.value_or(0);
      case Mode::Adjoint:
         return r.rows * l.adjoint_cost.value_or(0);
      case Mode::Multiply:
         return static_cast<Cost>(l.cols) * ld.vector_size(l.sink()) * r.rows;
   }
   return 0;
}

auto is_eliminatable(const LineDag& ld, VertexId left, VertexId right,
                     Mode mode) -> bool {
   const LineVertex& l = ld.vertex(left);
   const LineVertex& r = ld.vertex(right);
   switch (mode) {
      case Mode::Tangent:
         return l.jacobian_present && r.tangent_cost.has_value();
      case Mode::Adjoint:
         return r.jacobian_present && l.adjoint_cost.has_value();
      case Mode::Multiply:
         return l.jacobian_present && r.jacobian_present;
   }
   return false;
}

auto eliminate_edge(LineDag& ld, VertexId left, VertexId right, Mode mode,
                    EliminationObserver* observer) -> Cost {
   require_intermediate(ld, left, "left");
   require_intermediate(ld, right, "right");
   if (!ld.has_edge(left, right)) {
      throw NoSuchEdge(fmt::format("no edge {} -> {}",
                                   format_label(ld.vertex(left).label),
                                   format_label(ld.vertex(right).label)));
   }
   if (!is_eliminatable(ld, left, right, mode)) {
      throw NotEliminatable(fmt::format(
           "{} on {} -> {}: prerequisites unmet", mode_name(mode),
           format_label(ld.vertex(left).label),
           format_label(ld.vertex(right).label)));
   }
   const Cost cost = elimination_cost(ld, left, right, mode);

   // 1. fill, or absorb into a vertex with the same neighborhoods
   const std::vector<VertexId> preds = ld.vertex(left).preds;
   const std::vector<VertexId> succs = ld.vertex(right).succs;
   std::optional<VertexId> target;
   for (const VertexId c : ld.vertex(preds.front()).succs) {
      const LineVertex& v = ld.vertex(c);
      if (c != left && c != right && v.is_intermediate() &&
          v.jacobian_present && v.preds == preds && v.succs == succs) {
         target = c;
         break;
      }
   }

   if (target) {
      drop_models(ld.vertex(*target));
   } else {
      LineVertex fill;
      fill.label = ld.vertex(left).label;
      const PathLabel& tail = ld.vertex(right).label;
      fill.label.insert(fill.label.end(), tail.begin() + 1, tail.end());
      fill.rows = ld.vertex(right).rows;
      fill.cols = ld.vertex(left).cols;
      fill.jacobian_present = true;
      target = ld.add_vertex(std::move(fill));
      for (const VertexId p : preds) {
         ld.add_edge(p, *target);
      }
      for (const VertexId s : succs) {
         ld.add_edge(*target, s);
      }
      if (observer != nullptr) {
         observer->on_fill(ld, *target);
      }
   }

   // 2. absorb
   if (observer != nullptr) {
      observer->on_propagate(ld, *target, left, right, mode);
   }

   // 3. remove edge
   ld.remove_edge(left, right);

   // 4. left: isolated or mergeable
   if (ld.vertex(left).succs.empty()) {
      ld.remove_vertex(left);
   } else if (const auto twin = find_twin(ld, left)) {
      merge_into(ld, left, *twin, observer);
   }

   // 5. right: isolated or mergeable
   if (ld.vertex(right).preds.empty()) {
      ld.remove_vertex(right);
   } else if (const auto twin = find_twin(ld, right)) {
      merge_into(ld, right, *twin, observer);
   }

   return cost;
}

auto preaccumulation_cost(const LineDag& ld, VertexId v, Mode mode) -> Cost {
   const LineVertex& w = ld.vertex(v);
   if (mode == Mode::Tangent) {
      return w.cols * w.tangent_cost.value_or(0);
   }
   return w.rows * w.adjoint_cost.value_or(0);
}

auto preaccumulate(LineDag& ld, VertexId v, PreaccumulationMode mode,
                   EliminationObserver* observer) -> std::pair<Mode, Cost> {
   if (v >= ld.slots() || !ld.vertex(v).is_intermediate()) {
      throw NotElemental(fmt::format("vertex {} is not intermediate", v));
   }
   LineVertex& w = ld.vertex(v);
   if (!w.elemental) {
      throw NotElemental(fmt::format("{} is fill and has no elemental model",
                                     format_label(w.label)));
   }
   if (w.jacobian_present) {
      throw AlreadyAccumulated(
           fmt::format("{} already holds its Jacobian", format_label(w.label)));
   }

   const Cost tangent = preaccumulation_cost(ld, v, Mode::Tangent);
   const Cost adjoint = preaccumulation_cost(ld, v, Mode::Adjoint);
   Mode chosen = Mode::Tangent;
   switch (mode) {
      case PreaccumulationMode::Tangent:
         chosen = Mode::Tangent;
         break;
      case PreaccumulationMode::Adjoint:
         chosen = Mode::Adjoint;
         break;
      case PreaccumulationMode::Auto:
         chosen = tangent <= adjoint ? Mode::Tangent : Mode::Adjoint;
         break;
   }

   w.jacobian_present = true;
   if (observer != nullptr) {
      observer->on_preaccumulate(ld, v);
   }
   if (const auto twin = find_twin(ld, v)) {
      merge_into(ld, v, *twin, observer);
   }
   return {chosen, chosen == Mode::Tangent ? tangent : adjoint};
}

auto action_cost(const LineDag& ld, const Action& action) -> Cost {
   auto cheapest = [&](VertexId v) {
      return std::min(preaccumulation_cost(ld, v, Mode::Tangent),
                      preaccumulation_cost(ld, v, Mode::Adjoint));
   };
   if (action.kind == Action::Kind::Finalize) {
      return cheapest(action.left);
   }
   // Preaccumulation never changes dimensions or the models used here.
   Cost cost = elimination_cost(ld, action.left, action.right, action.mode);
   if (action.preaccumulate_left) {
      cost += cheapest(action.left);
   }
   if (action.preaccumulate_right) {
      cost += cheapest(action.right);
   }
   return cost;
}

auto apply_action(LineDag& ld, const Action& action, Plan* plan,
                  EliminationObserver* observer) -> Cost {
   Cost total = 0;
   auto accumulate = [&](VertexId v) {
      PathLabel label = ld.vertex(v).label;
      const auto [mode, cost] =
           preaccumulate(ld, v, PreaccumulationMode::Auto, observer);
      total += cost;
      if (plan != nullptr) {
         plan->steps.push_back(
              {PlanStep::Kind::Accumulate, mode, std::move(label), cost});
      }
   };

   if (action.kind == Action::Kind::Finalize) {
      accumulate(action.left);
      return total;
   }

   if (action.preaccumulate_left) {
      accumulate(action.left);
   }
   if (action.preaccumulate_right) {
      accumulate(action.right);
   }

   PathLabel face = action_label(ld, action);
   const Cost cost =
        eliminate_edge(ld, action.left, action.right, action.mode, observer);
   total += cost;
   if (plan != nullptr) {
      plan->steps.push_back(
           {PlanStep::Kind::Eliminate, action.mode, std::move(face), cost});
   }
   return total;
}

auto replay_sequence(const Dag& dag, const Plan& plan,
                     EliminationObserver* observer) -> ReplayResult {
   return replay_sequence(build_line_dag(dag), plan, observer);
}

auto replay_sequence(LineDag initial, const Plan& plan,
                     EliminationObserver* observer) -> ReplayResult {
   LineDag ld = std::move(initial);
   Cost total = 0;

   for (std::size_t k = 0; k < plan.steps.size(); ++k) {
      const PlanStep& step = plan.steps[k];
      Cost cost = 0;

      if (step.kind == PlanStep::Kind::Accumulate) {
         if (step.mode == Mode::Multiply) {
            throw StepInapplicable(k, "ACC cannot use MUL");
         }
         const auto v = ld.find_vertex(step.target);
         if (!v) {
            throw StepInapplicable(
                 k, fmt::format("no vertex {}", format_label(step.target)));
         }
         try {
            cost = preaccumulate(ld, *v,
                                 step.mode == Mode::Tangent
                                      ? PreaccumulationMode::Tangent
                                      : PreaccumulationMode::Adjoint,
                                 observer)
                        .second;
         } catch (const Error& e) {
            throw StepInapplicable(k, e.what());
         }
      } else {
         std::optional<std::pair<VertexId, VertexId>> edge;
         for (const auto& [l, r] : ld.intermediate_edges()) {
            if (action_label(ld, {Action::Kind::Eliminate, step.mode, l, r}) ==
                step.target) {
               edge = {l, r};
               break;
            }
         }
         if (!edge) {
            throw StepInapplicable(k, fmt::format("no edge with face {}",
                                                  format_label(step.target)));
         }
         try {
            cost = eliminate_edge(ld, edge->first, edge->second, step.mode,
                                  observer);
         } catch (const Error& e) {
            throw StepInapplicable(k, e.what());
         }
      }

      if (cost != step.cost) {
         throw CostMismatch(k, fmt::format("{}: recorded {}, recomputed {}",
                                           render_step(step), step.cost, cost));
      }
      total += cost;
   }

   const bool complete = is_complete(ld);
   return ReplayResult {total, std::move(ld), complete};
}

}  // namespace admission
