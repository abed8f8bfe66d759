#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "admission/error.hpp"
#include "admission/session.hpp"
#include "support/fixtures.hpp"

namespace admission {
namespace {

using testing::data_path;

namespace fs = std::filesystem;

class SessionTest : public ::testing::Test {
 protected:
   auto write(const std::string& name, const std::string& text) -> fs::path {
      const fs::path dir = fs::path(::testing::TempDir()) /
                           ::testing::UnitTest::GetInstance()->current_test_info()->name();
      fs::create_directories(dir);
      const fs::path path = dir / name;
      std::ofstream(path) << text;
      return path;
   }

   auto config(const std::string& dag, const std::string& method,
               const std::string& extra = "") -> fs::path {
      return write("session.cfg", "dag " + dag + "\nmethod " + method + "\n" + extra);
   }
};

auto without_elapsed(const std::string& report) -> std::string {
   std::istringstream in(report);
   std::string out;
   for (std::string line; std::getline(in, line);) {
      if (!line.starts_with("elapsed time:")) {
         out += line + '\n';
      }
   }
   return out;
}

auto field(const std::string& report, const std::string& key) -> Cost {
   const auto at = report.find(key);
   EXPECT_NE(at, std::string::npos) << key;
   return std::stoull(report.substr(at + key.size()));
}

TEST_F(SessionTest, ParseConfig) {
   const SessionConfig c = parse_session_config(
        "# planning session\n"
        "dag   models/lion.xml   # relative\n"
        "method BranchAndBound\n"
        "time_limit_s 2.5\nthreads 4\nseed 9\nverify 3\n",
        "/base");
   EXPECT_EQ(c.dag_path, fs::path("/base/models/lion.xml"));
   EXPECT_EQ(c.method, "BranchAndBound");
   EXPECT_EQ(c.time_limit_s, 2.5);
   EXPECT_EQ(c.threads, 4U);
   EXPECT_EQ(c.seed, 9U);
   EXPECT_EQ(c.verify_trials, 3U);
}

TEST_F(SessionTest, ConfigDefaults) {
   const SessionConfig c = parse_session_config("dag /x.xml\nmethod SparseTangent\n");
   EXPECT_EQ(c.dag_path, fs::path("/x.xml"));
   EXPECT_FALSE(c.time_limit_s.has_value());
   EXPECT_EQ(c.threads, 1U);
   EXPECT_EQ(c.seed, 0U);
   EXPECT_EQ(c.verify_trials, 0U);
}

TEST_F(SessionTest, ConfigErrors) {
   EXPECT_THROW(parse_session_config("dag a\nmethod B\ncolour red\n"), ConfigError);
   EXPECT_THROW(parse_session_config("dag a\ndag b\nmethod B\n"), ConfigError);
   EXPECT_THROW(parse_session_config("method B\n"), ConfigError);
   EXPECT_THROW(parse_session_config("dag a\n"), ConfigError);
   EXPECT_THROW(parse_session_config("dag a\nmethod\n"), ConfigError);
   EXPECT_THROW(parse_session_config("dag a\nmethod B\nthreads 0\n"), ConfigError);
   EXPECT_THROW(parse_session_config("dag a\nmethod B\nthreads two\n"), ConfigError);
   EXPECT_THROW(parse_session_config("dag a\nmethod B\ntime_limit_s -1\n"), ConfigError);
   EXPECT_THROW(parse_session_config("dag a\nmethod B\nseed 1.5\n"), ConfigError);
}

TEST_F(SessionTest, LionBranchAndBoundReport) {
   const SessionOutcome out =
        run_session(config(data_path("lion.xml").string(), "BranchAndBound"));
   ASSERT_EQ(out.exit_code, ExitCode::Ok) << out.error;
   const std::string& r = out.report;
   EXPECT_TRUE(r.starts_with("elapsed time: "));
   EXPECT_NE(r.find("elimination sequence \n  (operation mode target cost):\n"),
             std::string::npos);
   EXPECT_NE(r.find("  ACC TAN (0 1) 4\n"), std::string::npos);
   EXPECT_NE(r.find("dense tangent cost: 16\n"), std::string::npos);
   EXPECT_NE(r.find("dense adjoint cost: 64\n"), std::string::npos);
   EXPECT_NE(r.find("optimized cost: 16\n"), std::string::npos);
   EXPECT_NE(r.find("optimal: yes\n"), std::string::npos);
   EXPECT_NE(r.find("branch and bound statistics:\n"), std::string::npos);
   EXPECT_LE(field(r, "number of nodes visited: "),
             field(r, "number of nodes in search space: "));
}

TEST_F(SessionTest, RelativeDagPath) {
   const fs::path cfg = write("rel.cfg", "dag chain.txt\nmethod ChainDP\n");
   write("chain.txt", "2\n10 2 5\n1000 1000\n2000 2000\n");
   const SessionOutcome out = run_session(cfg);
   ASSERT_EQ(out.exit_code, ExitCode::Ok) << out.error;
   EXPECT_NE(out.report.find("optimized cost: 6100\n"), std::string::npos);
   EXPECT_NE(out.report.find("chain strategy: mul(adj[1], tan[2])\n"), std::string::npos);
   EXPECT_NE(out.report.find("optimal: yes\n"), std::string::npos);
}

TEST_F(SessionTest, ChainDpOnGraphmlChain) {
   const fs::path dag = write("chain.xml", R"(<graphml>
  <graph edgedefault="directed">
    <node id="a"><data key="index">0</data><data key="vector_size">10</data></node>
    <node id="b"><data key="index">1</data><data key="vector_size">2</data></node>
    <node id="c"><data key="index">2</data><data key="vector_size">5</data></node>
    <edge source="a" target="b"><data key="tangent_cost">1000</data>
      <data key="adjoint_cost">2000</data><data key="has_jacobian">0</data></edge>
    <edge source="b" target="c"><data key="tangent_cost">1000</data>
      <data key="adjoint_cost">2000</data><data key="has_jacobian">0</data></edge>
  </graph>
</graphml>)");
   const SessionOutcome out = run_session(config(dag.string(), "ChainDP", "verify 2\n"));
   ASSERT_EQ(out.exit_code, ExitCode::Ok) << out.error;
   EXPECT_NE(out.report.find("optimized cost: 6100\n"), std::string::npos);
   EXPECT_NE(out.report.find("verification: PASS"), std::string::npos);
}

TEST_F(SessionTest, ChainDpRejectsNonChain) {
   const SessionOutcome out = run_session(config(data_path("lion.xml").string(), "ChainDP"));
   EXPECT_EQ(out.exit_code, ExitCode::DagError);
   EXPECT_FALSE(out.error.empty());
}

TEST_F(SessionTest, ErrorExitCodes) {
   EXPECT_EQ(run_session(config(data_path("lion.xml").string(), "Foo")).exit_code,
             ExitCode::UnknownMethod);
   EXPECT_EQ(run_session(write("bad.cfg", "dag x\nmethod SparseTangent\nbogus 1\n")).exit_code,
             ExitCode::ConfigError);
   EXPECT_EQ(run_session("/nonexistent/config.cfg").exit_code, ExitCode::ConfigError);
   EXPECT_EQ(run_session(config("/nonexistent/dag.xml", "SparseTangent")).exit_code,
             ExitCode::DagError);
   const fs::path broken = write("broken.xml", "<graphml><graph><node id=\"a\"/></graph></graphml>");
   EXPECT_EQ(run_session(config(broken.string(), "SparseTangent")).exit_code,
             ExitCode::DagError);
}

TEST_F(SessionTest, VerificationVerdict) {
   const SessionOutcome out =
        run_session(config(data_path("bat.xml").string(), "GreedyMinFill", "verify 3\n"));
   ASSERT_EQ(out.exit_code, ExitCode::Ok) << out.error;
   EXPECT_NE(out.report.find("verification: PASS (3 trials"), std::string::npos);
   EXPECT_NE(out.report.find("optimal: no (heuristic)\n"), std::string::npos);
}

TEST_F(SessionTest, BudgetExhaustionIsFlagged) {
   const SessionOutcome out = run_session(
        config(data_path("newton2.xml").string(), "BranchAndBound", "time_limit_s 2\n"));
   ASSERT_EQ(out.exit_code, ExitCode::Ok) << out.error;
   EXPECT_NE(out.report.find("optimal: no (budget)\n"), std::string::npos);
   EXPECT_LE(field(out.report, "optimized cost: "), 162000U);
}

TEST_F(SessionTest, DenseReporters) {
   const SessionOutcome t = run_session(config(data_path("bat.xml").string(), "DenseTangent"));
   const SessionOutcome a = run_session(config(data_path("bat.xml").string(), "DenseAdjoint"));
   ASSERT_EQ(t.exit_code, ExitCode::Ok);
   ASSERT_EQ(a.exit_code, ExitCode::Ok);
   EXPECT_EQ(field(t.report, "optimized cost: "), 48U);
   EXPECT_EQ(field(a.report, "optimized cost: "), 96U);
   EXPECT_EQ(t.report.find("elimination sequence"), std::string::npos);
}

TEST_F(SessionTest, ReportCostInvariants) {
   for (const char* dag : {"lion.xml", "bat_classical.xml", "newton1.xml"}) {
      for (const char* method : {"SparseTangent", "SparseAdjoint", "GreedyMinFill",
                                 "BranchAndBound"}) {
         const SessionOutcome out = run_session(config(data_path(dag).string(), method));
         ASSERT_EQ(out.exit_code, ExitCode::Ok) << out.error;
         const Cost tangent = field(out.report, "dense tangent cost: ");
         const Cost adjoint = field(out.report, "dense adjoint cost: ");
         const Cost optimized = field(out.report, "optimized cost: ");
         const std::string m = method;
         if (m == "SparseTangent") {
            EXPECT_LE(optimized, tangent) << dag;
         } else if (m == "SparseAdjoint") {
            EXPECT_LE(optimized, adjoint) << dag;
         } else if (m == "BranchAndBound") {
            EXPECT_LE(optimized, std::min(tangent, adjoint)) << dag;
         } else {
            EXPECT_LE(optimized, std::max(tangent, adjoint)) << dag;
         }
      }
   }
}

TEST_F(SessionTest, SingleThreadReportsAreReproducible) {
   for (const char* method : {"BranchAndBound", "GreedyMinFill", "SparseAdjoint"}) {
      const fs::path cfg =
           config(data_path("bat_classical.xml").string(), method, "threads 1\nverify 2\n");
      const SessionOutcome first = run_session(cfg);
      const SessionOutcome second = run_session(cfg);
      ASSERT_EQ(first.exit_code, ExitCode::Ok);
      EXPECT_EQ(without_elapsed(first.report), without_elapsed(second.report)) << method;
   }
}

auto run_cli(const std::string& args, std::string& output) -> int {
   const std::string command = std::string(ADMISSION_CLI) + " " + args + " 2>&1";
   FILE* pipe = popen(command.c_str(), "r");
   if (pipe == nullptr) {
      return -1;
   }
   std::array<char, 4096> buffer {};
   output.clear();
   while (const auto n = fread(buffer.data(), 1, buffer.size(), pipe)) {
      output.append(buffer.data(), n);
   }
   const int status = pclose(pipe);
   return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(SessionTest, CommandLine) {
   std::string output;
   EXPECT_EQ(run_cli(config(data_path("lion.xml").string(), "BranchAndBound").string(), output),
             0);
   EXPECT_NE(output.find("optimized cost: 16"), std::string::npos) << output;

   EXPECT_EQ(run_cli(config(data_path("lion.xml").string(), "Foo").string(), output), 4);
   EXPECT_NE(output.find("Foo"), std::string::npos);
   EXPECT_EQ(run_cli("", output), 2);
   EXPECT_EQ(run_cli(write("x.cfg", "dag a\nmethod B\nnope 1\n").string(), output), 2);
   EXPECT_EQ(run_cli(config("/nonexistent.xml", "SparseTangent").string(), output), 3);
}

}  // namespace
}  // namespace admission
