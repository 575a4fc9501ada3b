#include <gtest/gtest.h>

#include <random>
#include <set>

#include "gtep/error.hpp"
#include "gtep/solver.hpp"
#include "support/random_models.hpp"

using namespace gtep;

namespace {

MilpModel named_model() {
  MilpModel m("toy");
  auto x = m.add_variable("g[1,1,1,1,7]", 0, 100, VarType::continuous, 12.5);
  auto b = m.add_binary("x[3]", 1e6);
  auto f = m.add_variable("theta free", -kInf, kInf);
  auto n = m.add_variable("neg", -kInf, -2.0, VarType::continuous, -1);
  m.add_variable("unused", 1.0, 1.0);
  m.add_constraint("balance[1,1,1,1,2]", {{x, 1}, {f, -0.1}}, Sense::equal, 35.25);
  m.add_constraint("cap", {{x, 1}, {b, -100}}, Sense::less_equal, 0);
  m.add_constraint("lim", {{n, 1}, {x, 0.3333333333333333}}, Sense::greater_equal, -50);
  m.set_objective_offset(5);
  return m;
}

}  // namespace

TEST(Mps, RoundTripNamedModel) {
  const MilpModel m = named_model();
  const MpsText mps = export_mps(m);
  std::string why;
  EXPECT_TRUE(structurally_equal(m, parse_mps(mps.text), &why)) << why << "\n" << mps.text;
  for (const auto& n : mps.column_names) EXPECT_LE(n.size(), kMpsNameLimit);
  for (const auto& n : mps.row_names) EXPECT_LE(n.size(), kMpsNameLimit);
}

TEST(Mps, ShortNamesAreUniqueAndStable) {
  MilpModel m;
  for (int i = 0; i < 2000; ++i) m.add_variable("a_rather_long_column_name_" + std::to_string(i), 0, 1);
  const MpsText a = export_mps(m), b = export_mps(m);
  EXPECT_EQ(a.text, b.text);
  std::set<std::string> seen(a.column_names.begin(), a.column_names.end());
  EXPECT_EQ(seen.size(), a.column_names.size());
}

TEST(Mps, RoundTripRandomModels) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 60; ++k) {
    const MilpModel m = oracle::random_lp(rng, {.binary_share = 0.3});
    std::string why;
    EXPECT_TRUE(structurally_equal(m, parse_mps(export_mps(m).text), &why)) << k << ": " << why;
  }
}

TEST(Mps, ParseFreeFormWithSetNames) {
  const char* text =
      "NAME test\n"
      "ROWS\n N obj\n L c1\n G c2\n E c3\n"
      "COLUMNS\n"
      " MARKER 'MARKER' 'INTORG'\n"
      " b obj 1 c1 1\n"
      " MARKER 'MARKER' 'INTEND'\n"
      " y obj -2 c2 1\n"
      " y c3 1\n"
      "RHS\n RHS c1 1 c2 0.5\n RHS c3 2\n"
      "BOUNDS\n UP BND y 4\n"
      "ENDATA\n";
  const MilpModel m = parse_mps(text);
  ASSERT_EQ(m.num_variables(), 2u);
  EXPECT_EQ(m.variable(0).type, VarType::binary);
  EXPECT_EQ(m.variable(1).upper, 4.0);
  EXPECT_EQ(m.constraint(2).sense, Sense::equal);
  EXPECT_EQ(m.constraint(2).rhs, 2.0);
}

TEST(Mps, ParseErrorsCarryLineNumbers) {
  const char* text = "NAME t\nROWS\n N obj\n Q c1\nENDATA\n";
  try {
    (void)parse_mps(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW((void)parse_mps("NAME t\nROWS\n N obj\nCOLUMNS\n x nope 1\nENDATA\n"), ParseError);
}

TEST(Mps, ObjectiveOffsetSign) {
  MilpModel m;
  auto x = m.add_variable("x", 1, 2, VarType::continuous, 1.5);
  (void)x;
  m.set_objective_offset(5);
  const std::string text = export_mps(m).text;
  EXPECT_NE(text.find("-5"), std::string::npos);
  EXPECT_DOUBLE_EQ(parse_mps(text).objective_offset(), 5.0);
}

TEST(LpFormat, WritesSectionsAndSanitizedNames) {
  const std::string lp = export_lp(named_model());
  EXPECT_NE(lp.find("Minimize"), std::string::npos);
  EXPECT_NE(lp.find("Subject To"), std::string::npos);
  EXPECT_NE(lp.find("Bounds"), std::string::npos);
  EXPECT_NE(lp.find("Binaries"), std::string::npos);
  EXPECT_NE(lp.find("g(1,1,1,1,7)"), std::string::npos);
  EXPECT_EQ(lp.find("theta free"), std::string::npos);
  EXPECT_EQ(lp.substr(lp.size() - 4), "End\n");
}

TEST(HighsSolution, ParsesOptimalWithDuals) {
  const char* text =
      "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 6.5\n"
      "# Columns 2\nx 1\ny 2.5\n# Rows 1\nr 3.5\n\n# Dual solution values\nFeasible\n"
      "# Columns 2\nx 0\ny 0\n# Rows 1\nr -1.25\n\n# Basis\nHiGHS v1\n";
  const Solution s = parse_highs_solution(text, {"x", "y"}, {"r"});
  EXPECT_EQ(s.status, SolveStatus::optimal);
  EXPECT_DOUBLE_EQ(s.primal[1], 2.5);
  EXPECT_DOUBLE_EQ(s.duals[0], -1.25);
  EXPECT_DOUBLE_EQ(s.objective, 6.5);
}

TEST(HighsSolution, ParsesInfeasibleAndRejectsGarbage) {
  const Solution s = parse_highs_solution(
      "Model status\nInfeasible\n\n# Primal solution values\nNone\n", {"x"}, {});
  EXPECT_EQ(s.status, SolveStatus::infeasible);
  EXPECT_FALSE(s.has_primal());
  EXPECT_THROW((void)parse_highs_solution("hello\n", {}, {}), ParseError);
  EXPECT_THROW((void)parse_highs_solution(
                   "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 1\n"
                   "# Columns 1\nzz 1\n",
                   {"x"}, {}),
               ParseError);
}

TEST(ExternalSolver, MissingExecutableIsConfigError) {
  EXPECT_THROW(ExternalBackend({.command = "definitely-not-a-solver-xyz {mps} {sol}"}), ConfigError);
}
