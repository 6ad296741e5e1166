#include "dmrselect/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <tuple>

#include "dmrselect/rng.hpp"

namespace dmr {

namespace {

// Elementary constraints satisfied by a model, as comparable tuples:
// (block, 0, j) for zero coefficients, (block, i, j) for merged level pairs
// among non-reference levels.
std::set<std::tuple<int, int, int>> constraint_set(const FeasibleModel& model,
                                                   const DesignShape& shape) {
  std::set<std::tuple<int, int, int>> out;
  std::vector<bool> kept(shape.p0 + 1, false);
  for (int j : model.retained_continuous) kept[j] = true;
  for (int j = 1; j <= shape.p0; ++j)
    if (!kept[j]) out.insert({0, 0, j});
  for (std::size_t k = 0; k < model.partitions.size(); ++k) {
    const int block = static_cast<int>(k) + 1;
    for (const auto& cluster : model.partitions[k]) {
      const bool reference = cluster[0] == 1;
      for (std::size_t a = 0; a < cluster.size(); ++a) {
        if (reference && cluster[a] >= 2) out.insert({block, 0, cluster[a]});
        for (std::size_t b = a + 1; b < cluster.size(); ++b)
          if (cluster[a] >= 2)
            out.insert({block, cluster[a], cluster[b]});
      }
    }
  }
  return out;
}

double sample_sd(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace

std::pair<double, double> elementary_rates(const FeasibleModel& truth,
                                           const FeasibleModel& selected,
                                           const DesignShape& shape) {
  const auto b_true = constraint_set(truth, shape);
  const auto b_hat = constraint_set(selected, shape);
  std::size_t common = 0;
  for (const auto& c : b_hat) common += b_true.count(c);
  const double tpr =
      b_true.empty() ? 1.0
                     : static_cast<double>(common) /
                           static_cast<double>(b_true.size());
  const double fdr =
      b_hat.empty() ? 0.0
                    : 1.0 - static_cast<double>(common) /
                                static_cast<double>(b_hat.size());
  return {tpr, fdr};
}

std::pair<double, double> star_rates(const FeasibleModel& truth,
                                     const FeasibleModel& selected,
                                     const DesignShape& shape) {
  const int common = model_intersection_dim(truth, selected, shape);
  const int size_true = truth.size(shape);
  const int size_hat = selected.size(shape);
  const double tpr = static_cast<double>(common) / size_true;
  const double fdr = 1.0 - static_cast<double>(common) / size_hat;
  return {tpr, fdr};
}

ExperimentSpec ExperimentSpec::make(int id, int c) {
  ExperimentSpec spec;
  spec.id = id;
  spec.c = c;
  switch (id) {
    case 1:
    case 3: {
      spec.family = id == 3 ? Family::Binomial : Family::Gaussian;
      spec.n = 96 * c;
      spec.shape.p0 = 0;
      spec.shape.level_counts = {8, 4, 3};
      spec.true_model.partitions = {
          {{1, 2}, {3, 4, 5, 6}, {7, 8}}, {{1, 2, 3, 4}}, {{1, 2, 3}}};
      spec.beta_star = Vector::Zero(spec.shape.param_count());
      spec.beta_star[0] = 2.0;
      const double effects[] = {0, -3, -3, -3, -3, -2, -2};  // levels 2..8
      for (int j = 2; j <= 8; ++j)
        spec.beta_star[spec.shape.column_of(1, j)] = effects[j - 2];
      break;
    }
    case 2: {
      spec.family = Family::Gaussian;
      spec.n = 128 * c;
      spec.shape.p0 = 8;
      spec.shape.level_counts = {8};
      spec.true_model.retained_continuous = {1, 3, 5, 7};
      spec.true_model.partitions = {{{1, 2}, {3, 4, 5, 6}, {7, 8}}};
      spec.beta_star = Vector::Zero(spec.shape.param_count());
      const double alpha0[] = {1, 0, 1, 0, 1, 0, 1, 0};
      for (int j = 1; j <= 8; ++j)
        spec.beta_star[spec.shape.column_of(0, j)] = alpha0[j - 1];
      const double alpha1[] = {0, -2, -2, -2, -2, 4, 4};  // levels 2..8
      for (int j = 2; j <= 8; ++j)
        spec.beta_star[spec.shape.column_of(1, j)] = alpha1[j - 2];
      break;
    }
    default:
      throw ValidationError("experiment id must be 1, 2 or 3");
  }
  return spec;
}

ExperimentData generate_experiment(const ExperimentSpec& spec,
                                   std::uint64_t seed) {
  Rng rng(seed);
  ExperimentData data;

  if (spec.id == 1 || spec.id == 3) {
    // Balanced full factorial: c consecutive observations per level
    // combination, combinations in lexicographic order.
    std::vector<std::vector<int>> codes(3);
    for (int i1 = 1; i1 <= 8; ++i1)
      for (int i2 = 1; i2 <= 4; ++i2)
        for (int i3 = 1; i3 <= 3; ++i3)
          for (int r = 0; r < spec.c; ++r) {
            codes[0].push_back(i1);
            codes[1].push_back(i2);
            codes[2].push_back(i3);
          }
    data.design = make_design(Matrix(spec.n, 0), codes, {8, 4, 3});
  } else {
    // One factor, 16 c observations per level in level order; the
    // continuous block is AR(0.8) noise around means tied to the true
    // factor clusters.
    const int c = spec.c;
    std::vector<int> codes;
    for (int level = 1; level <= 8; ++level)
      for (int r = 0; r < 16 * c; ++r) codes.push_back(level);
    const double means[3][8] = {{1, 1, 0, 0, 0, 0, 0, 0},
                                {0, 0, 1, 1, 1, 1, 0, 0},
                                {0, 0, 0, 0, 0, 0, 1, 1}};
    const double rho = 0.8;
    const double innovation = std::sqrt(1.0 - rho * rho);
    Matrix v0(spec.n, 8);
    for (int row = 0; row < spec.n; ++row) {
      const int block = row < 32 * c ? 0 : row < 96 * c ? 1 : 2;
      double prev = rng.normal();
      v0(row, 0) = prev;
      for (int j = 1; j < 8; ++j) {
        prev = rho * prev + innovation * rng.normal();
        v0(row, j) = prev;
      }
      for (int j = 0; j < 8; ++j) v0(row, j) += means[block][j];
    }
    data.design = make_design(v0, {codes}, {8});
  }

  const Vector mu = data.design.values * spec.beta_star;
  const int n = spec.n;
  data.y.resize(n);
  data.y_new.resize(n);
  if (spec.family == Family::Binomial) {
    for (int i = 0; i < n; ++i)
      data.y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-mu[i]))) ? 1.0 : 0.0;
    for (int i = 0; i < n; ++i)
      data.y_new[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-mu[i]))) ? 1.0 : 0.0;
  } else {
    for (int i = 0; i < n; ++i) data.y[i] = mu[i] + rng.normal();
    for (int i = 0; i < n; ++i) data.y_new[i] = mu[i] + rng.normal();
  }
  return data;
}

SelectorMetrics run_monte_carlo(const ExperimentSpec& spec,
                                const Selector& selector, int reps,
                                std::uint64_t seed) {
  if (reps < 1) throw ValidationError("reps must be >= 1");

  const bool has_cf = spec.id != 2;
  int tm_count = 0;
  int cf_count = 0;
  std::vector<double> tprs, fdrs, tpr_stars, fdr_stars, mseps, mds;
  int failures = 0;

  for (int rep = 0; rep < reps; ++rep) {
    const ExperimentData data =
        generate_experiment(spec, Rng::split(seed, rep));
    SelectionResult result;
    try {
      result = selector(data.design, data.y);
    } catch (const Error&) {
      ++failures;
      continue;
    }

    if (result.model == spec.true_model) ++tm_count;
    if (has_cf) {
      bool ok = true;
      for (std::size_t k = 0; k < spec.true_model.partitions.size(); ++k) {
        const bool noise = spec.true_model.partitions[k].size() == 1;
        const std::size_t chosen = result.model.partitions[k].size();
        if (noise ? chosen != 1 : chosen < 2) ok = false;
      }
      if (ok) ++cf_count;
    }

    const auto [tpr, fdr] =
        elementary_rates(spec.true_model, result.model, spec.shape);
    const auto [tpr_s, fdr_s] =
        star_rates(spec.true_model, result.model, spec.shape);
    tprs.push_back(tpr);
    fdrs.push_back(fdr);
    tpr_stars.push_back(tpr_s);
    fdr_stars.push_back(fdr_s);

    Vector predicted = data.design.values * result.beta;
    if (spec.family == Family::Binomial)
      for (int i = 0; i < predicted.size(); ++i)
        predicted[i] = 1.0 / (1.0 + std::exp(-predicted[i]));
    mseps.push_back((data.y_new - predicted).squaredNorm() /
                    static_cast<double>(spec.n));
    mds.push_back(result.model.size(spec.shape));
  }

  SelectorMetrics metrics;
  metrics.reps = reps;
  metrics.failures = failures;
  const int ok_reps = reps - failures;
  if (ok_reps > 0) {
    const double denom = ok_reps;
    metrics.tm = tm_count / denom;
    metrics.cf = has_cf ? cf_count / denom
                        : std::numeric_limits<double>::quiet_NaN();
    auto mean = [](const std::vector<double>& v) {
      double acc = 0.0;
      for (double x : v) acc += x;
      return acc / static_cast<double>(v.size());
    };
    metrics.tpr = mean(tprs);
    metrics.fdr = mean(fdrs);
    metrics.tpr_star = mean(tpr_stars);
    metrics.fdr_star = mean(fdr_stars);
    metrics.msep_mean = mean(mseps);
    metrics.msep_sd = sample_sd(mseps, metrics.msep_mean);
    metrics.md_mean = mean(mds);
    metrics.md_sd = sample_sd(mds, metrics.md_mean);
  } else {
    metrics.cf = std::numeric_limits<double>::quiet_NaN();
  }
  return metrics;
}

std::string metrics_csv_header() {
  return "experiment,n,selector,tm,cf,tpr,fdr,tpr_star,fdr_star,msep_mean,"
         "msep_sd,md_mean,md_sd,failures";
}

std::string metrics_csv_row(const ExperimentSpec& spec,
                            const std::string& selector_name,
                            const SelectorMetrics& metrics) {
  std::string row;
  row += std::to_string(spec.id);
  row += ',';
  row += std::to_string(spec.n);
  row += ',';
  row += selector_name;
  for (double value :
       {metrics.tm, metrics.cf, metrics.tpr, metrics.fdr, metrics.tpr_star,
        metrics.fdr_star, metrics.msep_mean, metrics.msep_sd, metrics.md_mean,
        metrics.md_sd}) {
    row += ',';
    row += format_double(value);
  }
  row += ',';
  row += std::to_string(metrics.failures);
  return row;
}

}  // namespace dmr
