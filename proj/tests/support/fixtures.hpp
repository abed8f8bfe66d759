#ifndef ADMISSION_TESTS_FIXTURES_HPP_
#define ADMISSION_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "admission/graphml.hpp"

namespace admission::testing {

inline auto data_path(std::string_view name) -> std::filesystem::path {
   return std::filesystem::path(ADMISSION_DATA_DIR) / name;
}

inline auto fixture(std::string_view stem) -> Dag {
   return load_graphml(data_path(std::string(stem) + ".xml"));
}

//! Ten MUL steps on classical Bat, total 22. Two fills are absorbed into the
//! existing (1 4) and (2 6), which is why those faces carry short labels.
inline constexpr std::string_view bat_classical_plan =
     "ELI MUL (1 3 4) 1\n"
     "ELI MUL (2 3 6) 1\n"
     "ELI MUL (-1 1 4) 2\n"
     "ELI MUL (-1 1 3) 2\n"
     "ELI MUL (-1 1 3 5) 4\n"
     "ELI MUL (-1 1 3 6) 2\n"
     "ELI MUL (0 2 6) 2\n"
     "ELI MUL (0 2 3) 2\n"
     "ELI MUL (0 2 3 4) 2\n"
     "ELI MUL (0 2 3 5) 4\n";

//! Optimal single Newton step, total 74,000.
inline constexpr std::string_view newton_optimal_plan =
     "ACC TAN (0 2) 2000\n"
     "ACC TAN (2 3) 8000\n"
     "ELI MUL (0 2 3) 1000\n"
     "ACC TAN (-1 2) 2000\n"
     "ELI MUL (-1 2 3) 1000\n"
     "ACC TAN (-1 1) 20000\n"
     "ELI TAN (-1 1 3) 10000\n"
     "ACC TAN (0 1) 20000\n"
     "ELI TAN (0 1 3) 10000\n"
     "ACC TAN (-1 3) 0\n";

}  // namespace admission::testing

#endif  // ADMISSION_TESTS_FIXTURES_HPP_
