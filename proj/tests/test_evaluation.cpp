#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dmrselect/evaluation.hpp"
#include "oracles.hpp"

using namespace dmr;

namespace {

DesignShape shape_of(const FeasibleModel& model, int p0) {
  DesignShape shape;
  shape.p0 = p0;
  for (const auto& partition : model.partitions) {
    int levels = 0;
    for (const auto& cluster : partition)
      levels += static_cast<int>(cluster.size());
    shape.level_counts.push_back(levels);
  }
  return shape;
}

}  // namespace

TEST_CASE("rates are perfect when the truth is selected") {
  Rng rng(1);
  DesignShape shape;
  shape.p0 = 3;
  shape.level_counts = {5, 3};
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = oracle::random_model(rng, shape);
    const auto [tpr, fdr] = elementary_rates(model, model, shape);
    const auto [tpr_s, fdr_s] = star_rates(model, model, shape);
    CHECK(tpr == 1.0);  // vacuously 1 when there is nothing to find
    CHECK(fdr == 0.0);
    CHECK(tpr_s == 1.0);
    CHECK(fdr_s == 0.0);
  }
}

TEST_CASE("selecting the full model discovers nothing") {
  FeasibleModel truth;
  truth.retained_continuous = {1};
  truth.partitions = {{{1, 4}, {2, 3}}};
  const auto shape = shape_of(truth, 1);
  const auto [tpr, fdr] = elementary_rates(truth, full_model(shape), shape);
  CHECK(tpr == 0.0);
  CHECK(fdr == 0.0);  // empty discovery set
}

TEST_CASE("pair counting on a five-level factor") {
  // truth {1,2},{3,4,5}; selected {1,2,3},{4,5}.  Enumerating by hand:
  // true set  = pair (4,5) among non-reference levels, zero for level 2,
  //             plus pairs (3,4),(3,5).
  // chosen set = zeros 2,3; pairs (2,3) and (4,5).
  FeasibleModel truth;
  truth.partitions = {{{1, 2}, {3, 4, 5}}};
  FeasibleModel chosen;
  chosen.partitions = {{{1, 2, 3}, {4, 5}}};
  const auto shape = shape_of(truth, 0);

  // |B| = 4: {zero(2), (3,4), (3,5), (4,5)}
  // |B_hat| = 4: {zero(2), zero(3), (2,3), (4,5)}
  // intersection = {zero(2), (4,5)} -> 2
  const auto [tpr, fdr] = elementary_rates(truth, chosen, shape);
  CHECK(tpr == doctest::Approx(2.0 / 4.0));
  CHECK(fdr == doctest::Approx(1.0 - 2.0 / 4.0));
}

TEST_CASE("a five-level factor admits ten merge constraints") {
  int count = 0;
  for (int i = 1; i <= 5; ++i)
    for (int j = i + 1; j <= 5; ++j) {
      ++count;
      (void)ElementaryConstraint::merge(1, i, j);
    }
  CHECK(count == 10);  // versus only 5 parameters
}

TEST_CASE("dimension-based rates on the worked example") {
  FeasibleModel truth;
  truth.retained_continuous = {1};
  truth.partitions = {{{1, 4}, {2, 3}}};
  const auto shape = shape_of(truth, 1);
  const auto [tpr_s, fdr_s] = star_rates(truth, full_model(shape), shape);
  CHECK(tpr_s == doctest::Approx(1.0));       // T ∩ F = T, 3/3
  CHECK(fdr_s == doctest::Approx(1.0 - 3.0 / 5.0));
}

TEST_CASE("growing the selection can only worsen the starred fdr") {
  FeasibleModel truth;
  truth.partitions = {{{1, 2}, {3, 4, 5, 6}, {7, 8}}};
  FeasibleModel mid;
  mid.partitions = {{{1, 2}, {3, 4}, {5, 6}, {7, 8}}};
  FeasibleModel big;
  big.partitions = {{{1, 2}, {3, 4}, {5}, {6}, {7, 8}}};
  const auto shape = shape_of(truth, 0);
  const auto [t1, f1] = star_rates(truth, mid, shape);
  const auto [t2, f2] = star_rates(truth, big, shape);
  CHECK(t1 == 1.0);
  CHECK(t2 == 1.0);
  CHECK(f1 <= f2);
}

TEST_CASE("experiment shapes and sizes") {
  const auto e1 = ExperimentSpec::make(1, 1);
  CHECK(e1.n == 96);
  CHECK(e1.shape.param_count() == 13);
  CHECK(e1.true_model.size(e1.shape) == 3);

  const auto e2 = ExperimentSpec::make(2, 1);
  CHECK(e2.n == 128);
  CHECK(e2.shape.param_count() == 16);
  CHECK(e2.true_model.size(e2.shape) == 7);

  const auto e3 = ExperimentSpec::make(3, 2);
  CHECK(e3.n == 192);
  CHECK(e3.family == Family::Binomial);

  CHECK_THROWS_AS(ExperimentSpec::make(4, 1), ValidationError);
}

TEST_CASE("experiment generation is deterministic in the seed") {
  const auto spec = ExperimentSpec::make(2, 1);
  const auto a = generate_experiment(spec, 12345);
  const auto b = generate_experiment(spec, 12345);
  CHECK((a.design.values - b.design.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y_new - b.y_new).cwiseAbs().maxCoeff() == 0.0);
  const auto c = generate_experiment(spec, 12346);
  CHECK((a.y - c.y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("experiment 1 responses average to the cell means") {
  const auto spec = ExperimentSpec::make(1, 4);
  const auto data = generate_experiment(spec, 7);
  const Vector mu = data.design.values * spec.beta_star;
  CHECK((data.y - mu).sum() / spec.n == doctest::Approx(0.0).epsilon(1.0));
  // noise has unit variance
  const double var = (data.y - mu).squaredNorm() / spec.n;
  CHECK(var == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("experiment 2 continuous block has the autoregressive covariance") {
  const auto spec = ExperimentSpec::make(2, 100);  // n = 12800
  const auto data = generate_experiment(spec, 31);
  const int n = spec.n;
  // remove the known block means, then compare sample covariance entries
  Matrix centered = data.design.values.block(0, 1, n, 8);
  const double means[3][8] = {{1, 1, 0, 0, 0, 0, 0, 0},
                              {0, 0, 1, 1, 1, 1, 0, 0},
                              {0, 0, 0, 0, 0, 0, 1, 1}};
  const int c = spec.c;
  for (int i = 0; i < n; ++i) {
    const int block = i < 32 * c ? 0 : i < 96 * c ? 1 : 2;
    for (int j = 0; j < 8; ++j) centered(i, j) -= means[block][j];
  }
  const Matrix cov = centered.transpose() * centered / n;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      CHECK(std::abs(cov(i, j) - std::pow(0.8, std::abs(i - j))) <= 0.05);
}

TEST_CASE("experiment 2 factor levels are balanced in order") {
  const auto spec = ExperimentSpec::make(2, 2);
  const auto data = generate_experiment(spec, 3);
  // level j occupies rows [16 c (j-1), 16 c j)
  const auto& shape = data.design.shape;
  for (int level = 2; level <= 8; ++level) {
    const int col = shape.column_of(1, level);
    for (int i = 0; i < spec.n; ++i) {
      const bool in_block = i >= 32 * (level - 1) && i < 32 * level;
      CHECK(data.design.values(i, col) == (in_block ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("a perfect selector scores perfectly in one replication") {
  const auto spec = ExperimentSpec::make(1, 1);
  const Selector truth_teller = [&](const DesignMatrix& design,
                                    const Vector& y) {
    SelectionResult result;
    result.model = spec.true_model;
    result.beta = constrained_fit(design, y, spec.true_model).beta;
    return result;
  };
  const auto metrics = run_monte_carlo(spec, truth_teller, 1, 5);
  CHECK(metrics.tm == 1.0);
  CHECK(metrics.cf == 1.0);
  CHECK(metrics.fdr_star == 0.0);
  CHECK(metrics.tpr == 1.0);
  CHECK(metrics.md_mean == doctest::Approx(3.0));
  CHECK(metrics.failures == 0);
}

TEST_CASE("failing replications are counted and excluded") {
  const auto spec = ExperimentSpec::make(1, 1);
  int calls = 0;
  const Selector flaky = [&](const DesignMatrix& design, const Vector& y) {
    if (++calls % 3 == 0) throw ZeroVarianceError("synthetic failure");
    SelectionResult result;
    result.model = spec.true_model;
    result.beta = constrained_fit(design, y, spec.true_model).beta;
    return result;
  };
  const auto metrics = run_monte_carlo(spec, flaky, 9, 11);
  CHECK(metrics.failures == 3);
  CHECK(metrics.reps == 9);
  CHECK(metrics.tm == 1.0);
}

TEST_CASE("metrics csv round-trips and hides cf when undefined") {
  const auto spec1 = ExperimentSpec::make(1, 1);
  SelectorMetrics metrics;
  metrics.tm = 1.0 / 3.0;
  metrics.cf = std::numeric_limits<double>::quiet_NaN();
  metrics.msep_mean = 1.0910000000000002;
  const auto row = metrics_csv_row(spec1, "dmr", metrics);
  std::stringstream ss(row);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  REQUIRE(fields.size() == 14);
  CHECK(fields[0] == "1");
  CHECK(fields[1] == "96");
  CHECK(fields[2] == "dmr");
  CHECK(fields[4] == "");  // NaN cf prints empty
  CHECK(std::stod(fields[3]) == metrics.tm);           // 17 digits round-trip
  CHECK(std::stod(fields[9]) == metrics.msep_mean);
  CHECK(metrics_csv_header().starts_with("experiment,n,selector,tm,cf"));
}

TEST_CASE("monte carlo is reproducible") {
  const auto spec = ExperimentSpec::make(1, 1);
  const Selector selector = [](const DesignMatrix& design, const Vector& y) {
    return dmr::dmr(design, y);
  };
  const auto a = run_monte_carlo(spec, selector, 5, 21);
  const auto b = run_monte_carlo(spec, selector, 5, 21);
  CHECK(metrics_csv_row(spec, "dmr", a) == metrics_csv_row(spec, "dmr", b));
}
