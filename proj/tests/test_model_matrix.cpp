#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "dmrselect/model_matrix.hpp"
#include "oracles.hpp"

using namespace dmr;

namespace {

// The worked one-factor-one-continuous example used across the suites:
// 8 observations, factor levels AABBCCDD, beta* = (1, 2, -2, -2, 0).
DataTable example_table() {
  DataTable t;
  t.names = {"y", "x", "f"};
  t.columns = {
      {"-2.14", "1.69", "-1.22", "-4.43", "-1.32", "-0.69", "1.33", "2.93"},
      {"-0.96", "-0.29", "0.26", "-1.15", "0.2", "0.03", "0.09", "1.12"},
      {"A", "A", "B", "B", "C", "C", "D", "D"}};
  return t;
}

std::vector<ColumnSpec> example_specs() {
  return {{"y", ColumnKind::Response, {}},
          {"x", ColumnKind::Continuous, {}},
          {"f", ColumnKind::Factor, {"A", "B", "C", "D"}}};
}

}  // namespace

TEST_CASE("one factor plus one continuous column encodes as the 8x5 matrix") {
  const auto [design, y] = build_design_matrix(example_table(), example_specs());
  CHECK(design.n() == 8);
  CHECK(design.p() == 5);
  CHECK(design.shape.p0 == 1);
  CHECK(design.shape.level_counts == std::vector<int>{4});

  CHECK(design.values.col(0).isOnes());
  CHECK(design.values(0, 1) == doctest::Approx(-0.96));
  // dummy block: level j >= 2 indicator
  Matrix expected(8, 3);
  expected << 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1,
      0, 0, 1;
  CHECK((design.values.rightCols(3) - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(y[3] == doctest::Approx(-4.43));

  CHECK(design.column_name(0) == "(Intercept)");
  CHECK(design.column_name(1) == "x");
  CHECK(design.column_name(2) == "f:B");
  CHECK(design.column_name(4) == "f:D");
}

TEST_CASE("response-only table gives the intercept-only design") {
  DataTable t;
  t.names = {"y"};
  t.columns = {{"1", "2", "3"}};
  const auto [design, y] = build_design_matrix(t, {{"y", ColumnKind::Response, {}}});
  CHECK(design.p() == 1);
  CHECK(design.values.col(0).isOnes());
}

TEST_CASE("exact collinearity is rejected") {
  DataTable t;
  t.names = {"y", "a", "b"};
  t.columns = {{"1", "2", "3", "4", "5"},
               {"1", "0", "2", "1", "3"},
               {"1", "0", "2", "1", "3"}};
  const std::vector<ColumnSpec> specs = {{"y", ColumnKind::Response, {}},
                                         {"a", ColumnKind::Continuous, {}},
                                         {"b", ColumnKind::Continuous, {}}};
  CHECK_THROWS_AS(build_design_matrix(t, specs), RankDeficientError);
}

TEST_CASE("undeclared factor level names the row") {
  auto t = example_table();
  t.columns[2][4] = "E";
  try {
    build_design_matrix(t, example_specs());
    FAIL("expected UnknownLevelError");
  } catch (const UnknownLevelError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'E'") != std::string::npos);
    CHECK(msg.find("row 6") != std::string::npos);
  }
}

TEST_CASE("n <= p is rejected") {
  DataTable t;
  t.names = {"y", "f"};
  t.columns = {{"1", "2", "3"}, {"A", "B", "C"}};
  const std::vector<ColumnSpec> specs = {
      {"y", ColumnKind::Response, {}},
      {"f", ColumnKind::Factor, {"A", "B", "C"}}};
  CHECK_THROWS_AS(build_design_matrix(t, specs), TooFewRowsError);
}

TEST_CASE("non-numeric continuous cell names line and column") {
  auto t = example_table();
  t.columns[1][2] = "oops";
  CHECK_THROWS_WITH_AS(build_design_matrix(t, example_specs()),
                       doctest::Contains("row 4"), ValidationError);
}

TEST_CASE("fit reproduces the projection from the normal equations") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracle::random_instance(rng, 50, 2, {4});
    const auto fit = fit_full_model(inst.design, inst.y);
    const Vector oracle_beta =
        oracle::normal_equations_beta(inst.design.values, inst.y);
    const Vector proj = inst.design.values * oracle_beta;
    const Vector ours = inst.design.values * fit.beta_hat;
    CHECK((ours - proj).norm() <= 1e-10 * proj.norm());
  }
}

TEST_CASE("rss identity and sigma2 from the QR route") {
  Rng rng(7);
  const auto inst = oracle::random_instance(rng, 60, 3, {3, 4});
  const auto fit = fit_full_model(inst.design, inst.y);
  const double direct =
      (inst.y - inst.design.values * fit.beta_hat).squaredNorm();
  CHECK(fit.rss == doctest::Approx(direct).epsilon(1e-10));
  CHECK(fit.sigma2_hat ==
        doctest::Approx(direct / (fit.n - fit.p)).epsilon(1e-10));

  // implied Q = X R^{-1} must be orthonormal with z = Q^T y
  const Matrix q = inst.design.values * fit.r_inv;
  CHECK((q.transpose() * q - Matrix::Identity(fit.p, fit.p))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  CHECK((q.transpose() * inst.y - fit.z).norm() <= 1e-10);
  // sign convention: diag(R) > 0 means diag(R^{-1}) > 0
  for (int i = 0; i < fit.p; ++i) CHECK(fit.r_inv(i, i) > 0.0);
}

TEST_CASE("response inside the column span gives zero variance") {
  Rng rng(3);
  const auto design = oracle::random_design(rng, 30, 2, {3});
  Vector beta = Vector::LinSpaced(design.p(), 1.0, 2.0);
  const Vector y = design.values * beta;
  const auto fit = fit_full_model(design, y);
  CHECK(fit.sigma2_hat == 0.0);
  CHECK(fit.rss == 0.0);
}

TEST_CASE("row permutation leaves the fit unchanged") {
  Rng rng(11);
  const auto inst = oracle::random_instance(rng, 40, 2, {3});
  const auto fit = fit_full_model(inst.design, inst.y);

  std::vector<int> order(40);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 39; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(0, i)]);

  DesignMatrix shuffled = inst.design;
  Vector y2(40);
  for (int i = 0; i < 40; ++i) {
    shuffled.values.row(i) = inst.design.values.row(order[i]);
    y2[i] = inst.y[order[i]];
  }
  const auto fit2 = fit_full_model(shuffled, y2);
  CHECK((fit.beta_hat - fit2.beta_hat).norm() <= 1e-9);
  CHECK(fit.sigma2_hat == doctest::Approx(fit2.sigma2_hat).epsilon(1e-9));
  CHECK(fit.rss == doctest::Approx(fit2.rss).epsilon(1e-9));
}

TEST_CASE("column bookkeeping is a bijection") {
  DesignShape shape;
  shape.p0 = 3;
  shape.level_counts = {4, 2, 5};
  const int p = shape.param_count();
  CHECK(p == 1 + 3 + 3 + 1 + 4);
  std::vector<bool> seen(p, false);
  for (int c = 0; c < p; ++c) {
    const auto [block, index] = shape.param_of(c);
    CHECK(shape.column_of(block, index) == c);
    CHECK(!seen[c]);
    seen[c] = true;
  }
}
