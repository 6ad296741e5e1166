#include "dmrselect/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dmr {

namespace {

constexpr double kProbClamp = 1e-10;
// IRLS moves eta by about one unit per iteration once a point is fitted
// nearly perfectly, so a linear predictor this size within 25 iterations
// only happens under (quasi-)separation.
constexpr double kEtaDivergence = 15.0;

double binomial_deviance(const Vector& y, const Vector& mu) {
  double dev = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    // 0 log 0 = 0 convention; mu is clamped away from {0, 1}.
    dev -= 2.0 * (y[i] * std::log(mu[i]) + (1.0 - y[i]) * std::log(1.0 - mu[i]));
  }
  return dev;
}

// Solve the weighted least-squares step min |sqrt(w) (zz - X b)| by QR and
// also return R^{-1} for the covariance.
struct WlsStep {
  Vector beta;
  Matrix r_inv;
};

WlsStep weighted_ls(const Matrix& x, const Vector& zz, const Vector& sqrt_w) {
  const int p = static_cast<int>(x.cols());
  const Matrix xw = sqrt_w.asDiagonal() * x;
  Eigen::HouseholderQR<Matrix> qr(xw);
  const Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const double max_diag = r.diagonal().cwiseAbs().maxCoeff();
  for (int i = 0; i < p; ++i)
    if (std::abs(r(i, i)) < kRankTol * max_diag)
      throw RankDeficientError("weighted design lost rank in IRLS");
  WlsStep step;
  const Vector qty =
      (qr.householderQ().adjoint() * (sqrt_w.cwiseProduct(zz))).head(p);
  step.beta = r.triangularView<Eigen::Upper>().solve(qty);
  step.r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  return step;
}

}  // namespace

GlmFit irls_fit(const Matrix& x, const Vector& y, const IrlsOptions& opts) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  for (int i = 0; i < n; ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw ValidationError("binomial response must be 0/1, got " +
                            std::to_string(y[i]) + " at observation " +
                            std::to_string(i + 1));

  GlmFit fit;
  fit.n = n;
  fit.p = p;
  fit.beta_hat = Vector::Zero(p);

  double deviance = std::numeric_limits<double>::infinity();
  Matrix r_inv;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    fit.iterations = iter;
    const Vector eta = x * fit.beta_hat;
    Vector mu(n), w(n);
    for (int i = 0; i < n; ++i) {
      const double m = 1.0 / (1.0 + std::exp(-eta[i]));
      mu[i] = std::clamp(m, kProbClamp, 1.0 - kProbClamp);
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Vector zz = eta + (y - mu).cwiseQuotient(w);
    const WlsStep step = weighted_ls(x, zz, w.cwiseSqrt());
    fit.beta_hat = step.beta;
    r_inv = step.r_inv;

    const Vector eta_new = x * fit.beta_hat;
    Vector mu_new(n);
    for (int i = 0; i < n; ++i)
      mu_new[i] = std::clamp(1.0 / (1.0 + std::exp(-eta_new[i])), kProbClamp,
                             1.0 - kProbClamp);
    const double dev_new = binomial_deviance(y, mu_new);

    if (eta_new.cwiseAbs().maxCoeff() > kEtaDivergence) fit.separation = true;

    if (std::abs(dev_new - deviance) / (std::abs(dev_new) + 0.1) < opts.tol) {
      deviance = dev_new;
      fit.converged = !fit.separation;
      break;
    }
    deviance = dev_new;
  }

  fit.deviance = deviance;
  fit.cov = r_inv * r_inv.transpose();
  return fit;
}

GlmFit gaussian_glm_fit(const Matrix& x, const Vector& y) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const WlsStep step = weighted_ls(x, y, Vector::Ones(n));
  GlmFit fit;
  fit.n = n;
  fit.p = p;
  fit.beta_hat = step.beta;
  fit.deviance = (y - x * step.beta).squaredNorm();
  const double sigma2 = fit.deviance / std::max(1, n - p);
  fit.cov = sigma2 * (step.r_inv * step.r_inv.transpose());
  fit.converged = true;
  fit.iterations = 1;
  return fit;
}

TStatistics wald_statistics(const GlmFit& fit, const DesignShape& shape) {
  TStatistics stats;
  const auto w2_delete = [&](int column) {
    const double var = fit.cov(column, column);
    if (!(var > 0.0)) throw ZeroVarianceError("zero variance in Wald statistic");
    return fit.beta_hat[column] * fit.beta_hat[column] / var;
  };
  const auto w2_merge = [&](int col_a, int col_b) {
    const double var =
        fit.cov(col_a, col_a) + fit.cov(col_b, col_b) - 2.0 * fit.cov(col_a, col_b);
    if (!(var > 0.0)) throw ZeroVarianceError("zero variance in Wald statistic");
    const double diff = fit.beta_hat[col_a] - fit.beta_hat[col_b];
    return diff * diff / var;
  };

  for (int j = 1; j <= shape.p0; ++j)
    stats.continuous_delete.push_back(w2_delete(shape.column_of(0, j)));
  for (int k = 1; k <= shape.n_factors(); ++k) {
    const int pk = shape.level_counts[k - 1];
    DissimilarityMatrix diss;
    diss.factor = k;
    diss.d = Matrix::Zero(pk, pk);
    for (int i = 1; i <= pk; ++i) {
      for (int j = i + 1; j <= pk; ++j) {
        const double value = i == 1
                                 ? w2_delete(shape.column_of(k, j))
                                 : w2_merge(shape.column_of(k, i),
                                            shape.column_of(k, j));
        diss.d(i - 1, j - 1) = value;
        diss.d(j - 1, i - 1) = value;
      }
    }
    stats.factor.push_back(std::move(diss));
  }
  return stats;
}

SelectionResult dmr_glm(const DesignMatrix& design, const Vector& y,
                        Family family, const DmrConfig& config) {
  const int n = design.n();
  const int p = design.p();
  const double r_n = config.penalty.value_or(std::log(n));

  const GlmFit full = family == Family::Binomial
                          ? irls_fit(design.values, y)
                          : gaussian_glm_fit(design.values, y);

  SelectionResult result;
  result.criterion = config.penalty ? "gic" : "bic";
  result.penalty = r_n;

  std::vector<PathStep> steps;
  if (p > 1) {
    const TStatistics stats = wald_statistics(full, design.shape);
    for (const auto& diss : stats.factor)
      result.dendrograms.push_back(cluster_factor(diss, config.linkage));
    steps = assemble_path(stats, result.dendrograms, design.shape);
  }

  // Step 4 by refitting: the quadratic recursion has no deviance analogue.
  NestedPath path;
  path.heights = Vector::Zero(p);
  path.rss.resize(p);
  path.gic.resize(p);
  path.sizes.resize(p);
  path.step_ok.assign(p, true);
  for (int m = 0; m < p - 1; ++m) {
    path.heights[m + 1] = steps[m].height;
    path.constraints.push_back(steps[m].constraint);
  }

  std::vector<FeasibleModel> models(p);
  for (int m = 0; m < p; ++m) {
    models[m] = constraints_to_model(
        std::span(path.constraints).first(static_cast<std::size_t>(m)),
        design.shape);
    path.sizes[m] = p - m;
    const auto sys = regularize(models[m], design.shape);
    const Matrix z1 = reduced_design(design, sys);
    if (family == Family::Binomial) {
      const GlmFit refit = irls_fit(z1, y);
      path.rss[m] = refit.deviance;
      if (refit.converged) {
        path.gic[m] = refit.deviance + r_n * path.sizes[m];
      } else {
        path.step_ok[m] = false;
        path.gic[m] = std::numeric_limits<double>::infinity();
      }
    } else {
      const GlmFit refit = gaussian_glm_fit(z1, y);
      path.rss[m] = refit.deviance;
      path.gic[m] = gaussian_gic(refit.deviance, path.sizes[m], n, r_n);
    }
  }

  int best = 0;
  if (family == Family::Binomial) {
    // argmin of deviance + r_n |M|, ties toward the smaller model; entries
    // flagged non-converged carry +inf and never win.
    double best_value = std::numeric_limits<double>::infinity();
    for (int m = 0; m < p; ++m) {
      if (path.gic[m] <= best_value) {
        best_value = path.gic[m];
        best = m;
      }
    }
  } else {
    best = gic_select(path, r_n, n);
  }
  result.selected_step = best;
  result.model = models[best];

  // Final coefficients at the winner, in design coordinates.
  const auto sys = regularize(result.model, design.shape);
  const Matrix z1 = reduced_design(design, sys);
  const GlmFit final_fit = family == Family::Binomial
                               ? irls_fit(z1, y)
                               : gaussian_glm_fit(z1, y);
  result.beta = Vector::Zero(p);
  for (int s = 0; s < sys.q; ++s)
    result.beta[sys.perm[s]] = final_fit.beta_hat[s];
  for (std::size_t t = 0; t < sys.source.size(); ++t)
    if (sys.source[t] >= 0)
      result.beta[sys.perm[sys.q + static_cast<int>(t)]] =
          final_fit.beta_hat[sys.source[t]];

  result.path = std::move(path);
  return result;
}

}  // namespace dmr
