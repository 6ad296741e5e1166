#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmrselect/constraints.hpp"
#include "dmrselect/model_matrix.hpp"
#include "dmrselect/types.hpp"

namespace dmr {

// Squared-statistic dissimilarities between the levels of one factor.
// Row/column 0 is the reference level: d(1, j) is the delete statistic of
// level j, d(i, j) for i, j >= 2 the merge statistic, zero diagonal.
struct DissimilarityMatrix {
  int factor = 0;  // 1-based factor index
  Matrix d;        // p_k x p_k, symmetric, nonnegative
};

// Step-1 output: squared t-statistics for every elementary constraint.
struct TStatistics {
  std::vector<double> continuous_delete;   // [j-1] = t^2 for variable j
  std::vector<DissimilarityMatrix> factor;  // one per factor
};

// t^2 for deletes and merges from the full-model fit.  Throws
// ZeroVarianceError when sigma2_hat is zero (saturated fit).
TStatistics t_statistics(const FullModelFit& fit, const DesignShape& shape);

struct DendrogramMerge {
  std::vector<int> left;   // members of the lower-minimum cluster
  std::vector<int> right;  // members of the other cluster
  double height = 0.0;
  ElementaryConstraint constraint;  // between the minimal members
};

struct DendrogramTrace {
  int factor = 0;
  std::vector<DendrogramMerge> merges;  // exactly p_k - 1
};

// Agglomerative clustering of one factor.  After a merge the distance to any
// other cluster is  linkage * min + (1 - linkage) * max  of the constituent
// distances, so linkage = 0 is complete linkage and linkage = 1 single.
DendrogramTrace cluster_factor(const DissimilarityMatrix& diss, double linkage);

struct PathStep {
  double height = 0.0;
  ElementaryConstraint constraint;
};

// Pool the continuous delete statistics and all dendrogram cutting heights,
// sorted ascending; ties break on (height, block, i, j).  Result has p - 1
// entries; the implicit step 0 (no constraints) has height 0.
std::vector<PathStep> assemble_path(const TStatistics& stats,
                                    std::span<const DendrogramTrace> dendrograms,
                                    const DesignShape& shape);

// RSS along the nested path by the rank-one recursion: with S = R^{-T} A0^T
// orthogonalized column by column into W,
//   RSS_0 = |y|^2 - |z|^2,  RSS_m = RSS_{m-1} + (w_m^T z)^2.
// Works for any ordering of linearly independent constraint rows.
Vector rss_path(const FullModelFit& fit, std::span<const PathStep> steps,
                const DesignShape& shape);

struct NestedPath {
  Vector heights;                              // length p, heights[0] = 0
  std::vector<ElementaryConstraint> constraints;  // p - 1, in path order
  Vector rss;                                  // gaussian: RSS; glm: deviance
  Vector gic;                                  // reported criterion values
  std::vector<int> sizes;                      // |M_m| = p - m
  std::vector<bool> step_ok;                   // refit converged (glm only)
};

// argmin_m  n log(rss_m) + sizes_m * r_n, ties toward larger m (the smaller
// model).  Throws ZeroRssError when some rss_m <= 0.
int gic_select(const NestedPath& path, double r_n, int n);

struct DmrConfig {
  double linkage = 0.0;            // b in [0, 1]; 0 = complete
  std::optional<double> penalty;   // r_n; defaults to log(n) (BIC)
};

struct SelectionResult {
  FeasibleModel model;
  Vector beta;                     // constrained estimate, design coordinates
  NestedPath path;
  std::vector<DendrogramTrace> dendrograms;
  std::string criterion;           // "bic" or "gic"
  double penalty = 0.0;            // r_n used
  int selected_step = 0;           // m*
};

// The whole algorithm: full QR fit, per-factor clustering, global constraint
// ordering, recursive RSS, criterion minimization, and a final constrained
// fit at the winner.  O(n p^2) total.
SelectionResult dmr(const DesignMatrix& design, const Vector& y,
                    const DmrConfig& config = {});

// Reported criterion value for a gaussian model: the full log-likelihood
// form  n log(2 pi rss / n) + n + r_n (q + 1),  which for r_n = log n is the
// textbook BIC including the variance parameter.  The additive offset does
// not depend on q, so selection by gic_select is unaffected.
double gaussian_gic(double rss, int q, int n, double r_n);

}  // namespace dmr
