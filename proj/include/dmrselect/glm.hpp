#pragma once

#include "dmrselect/core.hpp"

namespace dmr {

enum class Family { Gaussian, Binomial };

struct GlmFit {
  Vector beta_hat;
  Matrix cov;        // inverse Fisher information at the last iterate
  double deviance = 0.0;
  int n = 0;
  int p = 0;
  bool converged = false;
  bool separation = false;  // weights collapsed / coefficients diverging
  int iterations = 0;
};

struct IrlsOptions {
  int max_iter = 25;
  double tol = 1e-8;  // relative deviance change
};

// Logistic regression by iteratively reweighted least squares.  Complete or
// quasi-complete separation is flagged, not thrown: the fit carries the last
// iterate and separation = true.
GlmFit irls_fit(const Matrix& x, const Vector& y, const IrlsOptions& opts = {});

// Gaussian "IRLS" is a single weighted-least-squares step: deviance is the
// RSS and cov = sigma2 (X^T X)^{-1}.
GlmFit gaussian_glm_fit(const Matrix& x, const Vector& y);

// Squared Wald statistics from a fitted GLM, same layout as t_statistics.
// On a gaussian fit these reproduce the squared t-statistics.
TStatistics wald_statistics(const GlmFit& fit, const DesignShape& shape);

// DMR for generalized linear models: Wald dissimilarities drive steps 2-3,
// step 4 refits every model on the path (no exact recursion exists for the
// deviance), step 5 minimizes deviance + r_n |M| (binomial) or the gaussian
// criterion.  A refit that fails to converge gets +inf criterion and is
// flagged in path.step_ok.
SelectionResult dmr_glm(const DesignMatrix& design, const Vector& y,
                        Family family, const DmrConfig& config = {});

}  // namespace dmr
