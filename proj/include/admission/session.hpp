/******************************************************************************
 * @file admission/session.hpp
 *
 * @brief Configuration, method dispatch and report rendering behind the
 *        `admission <config-file>` front end.
 ******************************************************************************/

#ifndef ADMISSION_SESSION_HPP_
#define ADMISSION_SESSION_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "admission/dag.hpp"
#include "admission/numeric.hpp"
#include "admission/report.hpp"

namespace admission {

enum class ExitCode : int {
   Ok = 0,
   ConfigError = 2,
   DagError = 3,
   UnknownMethod = 4,
   VerificationFailure = 5,
};

struct SessionConfig {
   std::filesystem::path dag_path;
   std::string method;
   std::optional<double> time_limit_s;
   std::size_t threads {1};
   std::uint64_t seed {0};
   std::size_t verify_trials {0};
};

/**
 * Whitespace-separated `key value` lines; `#` starts a comment. Recognized
 * keys: dag, method, time_limit_s, threads, seed, verify. Relative dag paths
 * are resolved against `base_dir`. Throws ConfigError on unknown or
 * duplicate keys, malformed values, or a missing dag/method line.
 */
auto parse_session_config(std::string_view text,
                          const std::filesystem::path& base_dir = {})
     -> SessionConfig;

auto load_session_config(const std::filesystem::path& path) -> SessionConfig;

auto is_known_method(std::string_view method) -> bool;

//! The planning problem as loaded for a session. Chain-spec text is turned
//! into its single-path dag.
struct SessionInput {
   Dag dag;
   //! Only for chain-spec input.
   std::optional<std::string> chain_text;
};

//! GraphML when the first non-blank character is '<', chain spec otherwise.
//! Throws ParseError / InvalidDag.
auto load_session_input(const std::filesystem::path& path) -> SessionInput;

//! Throws UnknownMethod.
auto run_method(const SessionInput& input, const SessionConfig& config)
     -> PlanReport;

auto render_report(const PlanReport& report,
                   const std::optional<Verdict>& verdict) -> std::string;

struct SessionOutcome {
   ExitCode exit_code {ExitCode::Ok};
   //! Full report on success and on verification failure.
   std::string report;
   //! Diagnostic for every other non-zero exit code.
   std::string error;
};

auto run_session(const std::filesystem::path& config_path) -> SessionOutcome;

}  // namespace admission

#endif  // ADMISSION_SESSION_HPP_
