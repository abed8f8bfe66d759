#include "admission/graphml.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "admission/error.hpp"

namespace admission {

namespace {

namespace pt = boost::property_tree;

auto trim(const std::string& s) -> std::string {
   const auto first = s.find_first_not_of(" \t\r\n");
   if (first == std::string::npos) {
      return {};
   }
   const auto last = s.find_last_not_of(" \t\r\n");
   return s.substr(first, last - first + 1);
}

template<typename Int>
auto to_integer(const std::string& raw, const std::string& what) -> Int {
   const std::string s = trim(raw);
   Int value {};
   const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
   if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
      throw ParseError(fmt::format("{}: '{}' is not an integer", what, s));
   }
   return value;
}

//! Data values of one node or edge element, keyed by attribute name.
class DataBlock {
 public:
   DataBlock(const pt::ptree& element, std::string element_id,
             const std::unordered_map<std::string, std::string>& key_names)
        : m_id(std::move(element_id)) {
      for (const auto& [tag, child] : element) {
         if (tag != "data") {
            continue;
         }
         const std::string key = child.get<std::string>("<xmlattr>.key", "");
         const auto it = key_names.find(key);
         const std::string name = it == key_names.end() ? key : it->second;
         if (!m_values.emplace(name, child.data()).second) {
            throw ParseError(
                 fmt::format("{}: duplicate data key '{}'", m_id, name));
         }
      }
   }

   [[nodiscard]] auto optional(const std::string& name) const
        -> std::optional<std::string> {
      const auto it = m_values.find(name);
      if (it == m_values.end()) {
         return std::nullopt;
      }
      return trim(it->second);
   }

   [[nodiscard]] auto required(const std::string& name) const -> std::string {
      if (auto v = optional(name)) {
         return *v;
      }
      throw ParseError(fmt::format("{}: missing data key '{}'", m_id, name));
   }

   template<typename Int>
   [[nodiscard]] auto integer(const std::string& name) const -> Int {
      return to_integer<Int>(required(name), m_id + ": " + name);
   }

   [[nodiscard]] auto nonnegative(const std::string& name) const -> Cost {
      const auto value = integer<long long>(name);
      if (value < 0) {
         throw ParseError(
              fmt::format("{}: {} must be nonnegative", m_id, name));
      }
      return static_cast<Cost>(value);
   }

 private:
   std::string m_id;
   std::map<std::string, std::string> m_values;
};

auto parse_bool(const std::string& s, const std::string& what) -> bool {
   if (s == "1" || s == "true") {
      return true;
   }
   if (s == "0" || s == "false") {
      return false;
   }
   throw ParseError(fmt::format("{}: '{}' is not 0/1", what, s));
}

}  // namespace

auto parse_graphml(std::istream& in) -> Dag {
   pt::ptree tree;
   try {
      pt::read_xml(in, tree);
   } catch (const pt::xml_parser_error& e) {
      throw ParseError(fmt::format("malformed XML: {}", e.what()));
   }

   const auto root = tree.get_child_optional("graphml");
   if (!root) {
      throw ParseError("missing <graphml> root element");
   }

   std::unordered_map<std::string, std::string> key_names;
   for (const auto& [tag, child] : *root) {
      if (tag == "key") {
         const auto id = child.get<std::string>("<xmlattr>.id", "");
         const auto name = child.get<std::string>("<xmlattr>.attr.name", id);
         key_names[id] = name;
      }
   }

   const auto graph = root->get_child_optional("graph");
   if (!graph) {
      throw ParseError("missing <graph> element");
   }

   std::vector<DagVertex> vertices;
   std::unordered_map<std::string, int> index_of_node;
   std::unordered_map<int, std::string> node_of_index;
   std::vector<DagEdge> edges;

   for (const auto& [tag, child] : *graph) {
      if (tag != "node") {
         continue;
      }
      const auto id = child.get<std::string>("<xmlattr>.id", "");
      const std::string where = fmt::format("node '{}'", id);
      if (id.empty()) {
         throw ParseError("node without id attribute");
      }
      const DataBlock data(child, where, key_names);
      DagVertex v;
      v.index = data.integer<int>("index");
      const auto size = data.integer<long long>("vector_size");
      if (size < 1) {
         throw ParseError(fmt::format("{}: vector_size must be >= 1", where));
      }
      v.vector_size = static_cast<std::size_t>(size);

      if (!index_of_node.emplace(id, v.index).second) {
         throw ParseError(fmt::format("{}: duplicate node id", where));
      }
      if (const auto [it, fresh] = node_of_index.emplace(v.index, id); !fresh) {
         throw ParseError(fmt::format("{}: duplicate vertex index {} (also on "
                                      "node '{}')",
                                      where, v.index, it->second));
      }
      vertices.push_back(v);
   }

   std::size_t ordinal = 0;
   for (const auto& [tag, child] : *graph) {
      if (tag != "edge") {
         continue;
      }
      const auto id = child.get<std::string>("<xmlattr>.id",
                                             "#" + std::to_string(ordinal));
      ++ordinal;
      const std::string where = fmt::format("edge '{}'", id);
      const auto endpoint = [&](const char* attr) {
         const auto node = child.get<std::string>(
              std::string("<xmlattr>.") + attr, "");
         const auto it = index_of_node.find(node);
         if (it == index_of_node.end()) {
            throw ParseError(
                 fmt::format("{}: unknown {} node '{}'", where, attr, node));
         }
         return it->second;
      };

      const DataBlock data(child, where, key_names);
      DagEdge e;
      e.source = endpoint("source");
      e.target = endpoint("target");
      e.tangent_cost = data.nonnegative("tangent_cost");
      e.adjoint_cost = data.nonnegative("adjoint_cost");
      e.has_jacobian =
           parse_bool(data.required("has_jacobian"), where + ": has_jacobian");
      if (const auto kind = data.optional("jacobian_kind")) {
         if (*kind == "identity") {
            e.jacobian_kind = JacobianKind::Identity;
         } else if (*kind != "general") {
            throw ParseError(
                 fmt::format("{}: unknown jacobian_kind '{}'", where, *kind));
         }
      }
      edges.push_back(e);
   }

   try {
      Dag dag(std::move(vertices), std::move(edges));
      validate_dag(dag);
      return dag;
   } catch (const CycleDetected&) {
      throw;
   } catch (const DanglingVertex&) {
      throw;
   } catch (const InvalidDag& e) {
      throw ParseError(e.what());
   }
}

auto parse_graphml(const std::string& text) -> Dag {
   std::istringstream in(text);
   return parse_graphml(in);
}

auto load_graphml(const std::filesystem::path& path) -> Dag {
   std::ifstream in(path);
   if (!in) {
      throw ParseError(fmt::format("cannot open '{}'", path.string()));
   }
   return parse_graphml(in);
}

auto serialize_graphml(const Dag& dag) -> std::string {
   std::string out;
   auto line = [&out](const std::string& s) {
      out += s;
      out += '\n';
   };

   line(R"(<?xml version="1.0" encoding="UTF-8"?>)");
   line(R"(<graphml xmlns="http://graphml.graphdrawing.org/xmlns">)");
   for (const char* node_key : {"index", "vector_size"}) {
      line(fmt::format(
           R"(  <key id="{0}" for="node" attr.name="{0}" attr.type="int"/>)",
           node_key));
   }
   for (const char* edge_key : {"tangent_cost", "adjoint_cost"}) {
      line(fmt::format(
           R"(  <key id="{0}" for="edge" attr.name="{0}" attr.type="int"/>)",
           edge_key));
   }
   line(R"(  <key id="has_jacobian" for="edge" attr.name="has_jacobian" )"
        R"(attr.type="boolean"/>)");
   line(R"(  <key id="jacobian_kind" for="edge" attr.name="jacobian_kind" )"
        R"(attr.type="string"/>)");
   line(R"(  <graph id="G" edgedefault="directed">)");

   for (const DagVertex& v : dag.vertices()) {
      line(fmt::format(R"(    <node id="{}">)", v.index));
      line(fmt::format(R"(      <data key="index">{}</data>)", v.index));
      line(fmt::format(R"(      <data key="vector_size">{}</data>)",
                       v.vector_size));
      line("    </node>");
   }

   for (std::size_t k = 0; k < dag.edges().size(); ++k) {
      const DagEdge& e = dag.edges()[k];
      line(fmt::format(R"(    <edge id="{}" source="{}" target="{}">)", k,
                       e.source, e.target));
      line(fmt::format(R"(      <data key="tangent_cost">{}</data>)",
                       e.tangent_cost));
      line(fmt::format(R"(      <data key="adjoint_cost">{}</data>)",
                       e.adjoint_cost));
      line(fmt::format(R"(      <data key="has_jacobian">{}</data>)",
                       e.has_jacobian ? 1 : 0));
      if (e.jacobian_kind == JacobianKind::Identity) {
         line(R"(      <data key="jacobian_kind">identity</data>)");
      }
      line("    </edge>");
   }

   line("  </graph>");
   line("</graphml>");
   return out;
}

}  // namespace admission
