#ifndef ADMISSION_GRAPHML_HPP_
#define ADMISSION_GRAPHML_HPP_

#include <filesystem>
#include <istream>
#include <string>

#include "admission/dag.hpp"

namespace admission {

/**
 * Reads a dag from GraphML. Nodes need `index` and `vector_size` data,
 * edges need `tangent_cost`, `adjoint_cost` and `has_jacobian`; the optional
 * edge datum `jacobian_kind` is `general` (default) or `identity`. Data keys
 * may be referenced either by their declared `attr.name` or directly by name.
 * The result is validated. Throws ParseError (naming the offending element
 * id) or an InvalidDag subclass.
 */
auto parse_graphml(std::istream& in) -> Dag;
auto parse_graphml(const std::string& text) -> Dag;
auto load_graphml(const std::filesystem::path& path) -> Dag;

//! Writes the same dialect parse_graphml() reads; node ids equal indices.
auto serialize_graphml(const Dag& dag) -> std::string;

}  // namespace admission

#endif  // ADMISSION_GRAPHML_HPP_
