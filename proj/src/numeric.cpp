#include "admission/numeric.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "admission/error.hpp"
#include "admission/line_dag.hpp"

namespace admission {

namespace {

class MatrixObserver final : public EliminationObserver {
 public:
   MatrixObserver(const NumericInstance& instance, const NumericOptions& options)
       : m_instance(instance), m_options(options) {}

   auto seed(const LineDag& ld) -> void {
      for (VertexId v = 0; v < ld.slots(); ++v) {
         if (ld.vertex(v).is_intermediate() && ld.vertex(v).jacobian_present) {
            m_values[v] = elemental(ld, v);
         }
      }
   }

   auto on_fill(const LineDag& ld, VertexId fill) -> void override {
      const LineVertex& f = ld.vertex(fill);
      m_values[fill] = Matrix::Zero(static_cast<Eigen::Index>(f.rows),
                                    static_cast<Eigen::Index>(f.cols));
   }

   auto on_propagate(const LineDag& ld, VertexId target, VertexId left,
                     VertexId right, Mode mode) -> void override {
      Matrix& out = m_values.at(target);
      switch (mode) {
         case Mode::Tangent:
            out += elemental(ld, right) * m_values.at(left);
            break;
         case Mode::Adjoint:
            out += m_values.at(right) * elemental(ld, left);
            break;
         case Mode::Multiply:
            if (m_options.swap_multiply && *m_options.swap_multiply == m_products) {
               const Matrix& a = m_values.at(left);
               const Matrix& b = m_values.at(right);
               if (a.cols() != b.rows() || a.rows() != out.rows() ||
                   b.cols() != out.cols()) {
                  throw std::invalid_argument(
                       "swapped product needs square blocks of equal size");
               }
               out += a * b;
            } else {
               out += m_values.at(right) * m_values.at(left);
            }
            ++m_products;
            break;
      }
   }

   auto on_preaccumulate(const LineDag& ld, VertexId v) -> void override {
      m_values[v] = elemental(ld, v);
   }

   auto on_merge(const LineDag& /*ld*/, VertexId survivor, VertexId absorbed)
        -> void override {
      m_values.at(survivor) += m_values.at(absorbed);
      m_values.erase(absorbed);
   }

   [[nodiscard]] auto value(VertexId v) const -> const Matrix& {
      return m_values.at(v);
   }

 private:
   [[nodiscard]] auto elemental(const LineDag& ld, VertexId v) const
        -> const Matrix& {
      const LineVertex& lv = ld.vertex(v);
      const DagEdge& e = ld.dag().edges()[lv.edge];
      return m_instance.jacobians.at({e.source, e.target});
   }

   const NumericInstance& m_instance;
   const NumericOptions& m_options;
   std::unordered_map<VertexId, Matrix> m_values;
   std::size_t m_products {0};
};

auto zero_blocks(const Dag& dag) -> JacobianResult {
   JacobianResult result;
   for (const int x : dag.inputs()) {
      for (const int y : dag.outputs()) {
         result.blocks[{x, y}] =
              Matrix::Zero(static_cast<Eigen::Index>(dag.vector_size(y)),
                           static_cast<Eigen::Index>(dag.vector_size(x)));
      }
   }
   return result;
}

}  // namespace

auto instantiate_numeric(const Dag& dag, std::uint64_t seed) -> NumericInstance {
   NumericInstance instance;
   instance.seed = seed;
   std::mt19937_64 rng(seed);
   std::uniform_real_distribution<double> entry(-1.0, 1.0);
   for (const DagEdge& e : dag.edges()) {
      const auto rows = static_cast<Eigen::Index>(dag.vector_size(e.target));
      const auto cols = static_cast<Eigen::Index>(dag.vector_size(e.source));
      Matrix m(rows, cols);
      if (e.jacobian_kind == JacobianKind::Identity) {
         m.setIdentity();
      } else {
         for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) {
               m(i, j) = entry(rng);
            }
         }
      }
      instance.jacobians.emplace(VertexPair {e.source, e.target}, std::move(m));
   }
   return instance;
}

auto reference_jacobian(const Dag& dag, const NumericInstance& instance)
     -> JacobianResult {
   JacobianResult result = zero_blocks(dag);
   const auto order = dag.topological_order();

   for (const int x : dag.inputs()) {
      const auto nx = static_cast<Eigen::Index>(dag.vector_size(x));
      std::unordered_map<int, Matrix> tangent;
      tangent[x] = Matrix::Identity(nx, nx);
      for (const int v : order) {
         if (v == x) {
            continue;
         }
         Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(dag.vector_size(v)), nx);
         for (const std::size_t e : dag.in_edges(v)) {
            const DagEdge& edge = dag.edges()[e];
            if (const auto it = tangent.find(edge.source); it != tangent.end()) {
               sum += instance.jacobians.at({edge.source, v}) * it->second;
            }
         }
         tangent[v] = std::move(sum);
      }
      for (const int y : dag.outputs()) {
         result.blocks[{x, y}] = tangent.at(y);
      }
   }
   return result;
}

auto execute_sequence_numeric(const Dag& dag, const NumericInstance& instance,
                              const Plan& plan, const NumericOptions& options)
     -> JacobianResult {
   LineDag initial = build_line_dag(dag);
   MatrixObserver observer(instance, options);
   observer.seed(initial);

   const ReplayResult replay = replay_sequence(std::move(initial), plan, &observer);
   if (!replay.complete) {
      throw IncompletePlan(
           fmt::format("plan of {} steps leaves the line dag incomplete",
                       plan.steps.size()));
   }

   JacobianResult result = zero_blocks(dag);
   const LineDag& final_state = replay.final_state;
   for (const VertexId v : final_state.intermediates()) {
      const LineVertex& lv = final_state.vertex(v);
      const auto block = result.blocks.find({lv.source(), lv.sink()});
      if (block == result.blocks.end()) {
         throw IncompletePlan(fmt::format(
              "vertex {} does not connect an input to an output",
              format_label(lv.label)));
      }
      block->second += observer.value(v);
   }
   return result;
}

auto max_relative_error(const JacobianResult& computed,
                        const JacobianResult& reference) -> double {
   double worst = 0.0;
   for (const auto& [key, expected] : reference.blocks) {
      const auto it = computed.blocks.find(key);
      if (it == computed.blocks.end() || it->second.rows() != expected.rows() ||
          it->second.cols() != expected.cols()) {
         return std::numeric_limits<double>::infinity();
      }
      const double scale = expected.norm();
      const double error = (it->second - expected).norm();
      worst = std::max(worst, scale > 0.0 ? error / scale : error);
   }
   return worst;
}

auto verify_plan(const Dag& dag, const Plan& plan, std::size_t trials,
                 std::uint64_t first_seed, const NumericOptions& options)
     -> Verdict {
   Verdict verdict;
   verdict.trials = trials;
   verdict.pass = true;
   for (std::size_t t = 0; t < trials; ++t) {
      const std::uint64_t seed = first_seed + t;
      const NumericInstance instance = instantiate_numeric(dag, seed);
      double error = 0.0;
      try {
         error = max_relative_error(
              execute_sequence_numeric(dag, instance, plan, options),
              reference_jacobian(dag, instance));
      } catch (const std::exception& e) {
         verdict.pass = false;
         verdict.failure = e.what();
         verdict.worst_error = std::numeric_limits<double>::infinity();
         verdict.worst_seed = seed;
         return verdict;
      }
      if (error > verdict.worst_error || t == 0) {
         verdict.worst_error = error;
         verdict.worst_seed = seed;
      }
      if (!(error <= verification_tolerance)) {
         verdict.pass = false;
      }
   }
   return verdict;
}

}  // namespace admission
