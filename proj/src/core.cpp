#include "dmrselect/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

namespace dmr {

TStatistics t_statistics(const FullModelFit& fit, const DesignShape& shape) {
  if (!(fit.sigma2_hat > 0.0))
    throw ZeroVarianceError(
        "residual variance is zero: response lies in the design span");

  TStatistics stats;
  const auto t2_delete = [&](int column) {
    const Vector row = fit.r_inv.row(column).transpose();
    const double est = row.dot(fit.z);
    return est * est / (fit.sigma2_hat * row.squaredNorm());
  };
  const auto t2_merge = [&](int col_a, int col_b) {
    const Vector diff =
        (fit.r_inv.row(col_a) - fit.r_inv.row(col_b)).transpose();
    const double est = diff.dot(fit.z);
    return est * est / (fit.sigma2_hat * diff.squaredNorm());
  };

  for (int j = 1; j <= shape.p0; ++j)
    stats.continuous_delete.push_back(t2_delete(shape.column_of(0, j)));

  for (int k = 1; k <= shape.n_factors(); ++k) {
    const int pk = shape.level_counts[k - 1];
    DissimilarityMatrix diss;
    diss.factor = k;
    diss.d = Matrix::Zero(pk, pk);
    for (int i = 1; i <= pk; ++i) {
      for (int j = i + 1; j <= pk; ++j) {
        const double value = i == 1
                                 ? t2_delete(shape.column_of(k, j))
                                 : t2_merge(shape.column_of(k, i),
                                            shape.column_of(k, j));
        diss.d(i - 1, j - 1) = value;
        diss.d(j - 1, i - 1) = value;
      }
    }
    stats.factor.push_back(std::move(diss));
  }
  return stats;
}

DendrogramTrace cluster_factor(const DissimilarityMatrix& diss,
                               double linkage) {
  const int pk = static_cast<int>(diss.d.rows());
  DendrogramTrace trace;
  trace.factor = diss.factor;

  std::vector<Cluster> clusters;
  for (int level = 1; level <= pk; ++level) clusters.push_back({level});
  Matrix dist = diss.d;
  std::vector<int> alive(pk);
  for (int i = 0; i < pk; ++i) alive[i] = i;

  while (alive.size() > 1) {
    // Deterministic argmin: first strictly smaller wins, scanning clusters in
    // creation order.
    int best_a = -1, best_b = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t ii = 0; ii < alive.size(); ++ii) {
      for (std::size_t jj = ii + 1; jj < alive.size(); ++jj) {
        const double d = dist(alive[ii], alive[jj]);
        if (d < best) {
          best = d;
          best_a = alive[ii];
          best_b = alive[jj];
        }
      }
    }

    const int min_a = clusters[best_a][0];
    const int min_b = clusters[best_b][0];
    DendrogramMerge merge;
    merge.height = best;
    merge.left = min_a < min_b ? clusters[best_a] : clusters[best_b];
    merge.right = min_a < min_b ? clusters[best_b] : clusters[best_a];
    merge.constraint =
        ElementaryConstraint::merge(diss.factor, min_a, min_b);
    trace.merges.push_back(merge);

    // Merge b into a; update distances with the convex min/max rule.
    Cluster merged = clusters[best_a];
    merged.insert(merged.end(), clusters[best_b].begin(),
                  clusters[best_b].end());
    std::sort(merged.begin(), merged.end());
    clusters[best_a] = std::move(merged);
    for (int other : alive) {
      if (other == best_a || other == best_b) continue;
      const double d1 = dist(best_a, other);
      const double d2 = dist(best_b, other);
      const double d = linkage * std::min(d1, d2) +
                       (1.0 - linkage) * std::max(d1, d2);
      dist(best_a, other) = d;
      dist(other, best_a) = d;
    }
    alive.erase(std::remove(alive.begin(), alive.end(), best_b), alive.end());
  }
  return trace;
}

std::vector<PathStep> assemble_path(const TStatistics& stats,
                                    std::span<const DendrogramTrace> dendrograms,
                                    const DesignShape& shape) {
  std::vector<PathStep> steps;
  for (int j = 1; j <= shape.p0; ++j)
    steps.push_back({stats.continuous_delete[j - 1],
                     ElementaryConstraint::deletion(0, j)});
  for (const auto& trace : dendrograms)
    for (const auto& merge : trace.merges)
      steps.push_back({merge.height, merge.constraint});

  std::sort(steps.begin(), steps.end(), [](const PathStep& a, const PathStep& b) {
    return std::tie(a.height, a.constraint.block, a.constraint.i,
                    a.constraint.j) < std::tie(b.height, b.constraint.block,
                                               b.constraint.i, b.constraint.j);
  });
  return steps;
}

namespace {

// Constraint row in design coordinates.
Vector constraint_row(const ElementaryConstraint& raw, const DesignShape& shape,
                      int p) {
  Vector row = Vector::Zero(p);
  const auto c = raw.canonical();
  if (c.kind == ElementaryConstraint::Kind::Delete) {
    row[shape.column_of(0, c.j)] = 1.0;
  } else if (c.i == 1) {
    row[shape.column_of(c.block, c.j)] = 1.0;
  } else {
    row[shape.column_of(c.block, c.i)] = -1.0;
    row[shape.column_of(c.block, c.j)] = 1.0;
  }
  return row;
}

}  // namespace

Vector rss_path(const FullModelFit& fit, std::span<const PathStep> steps,
                const DesignShape& shape) {
  const int p = fit.p;
  const int m_total = static_cast<int>(steps.size());
  Vector rss(m_total + 1);
  rss[0] = fit.rss;

  // Orthogonalize the columns of S = R^{-T} A0^T one at a time (Gram-Schmidt
  // with one reorthogonalization pass), accumulating the rank-one updates.
  Matrix w(p, m_total);
  for (int m = 0; m < m_total; ++m) {
    const Vector a = constraint_row(steps[m].constraint, shape, p);
    Vector s = fit.r_inv.transpose() * a;
    const double original_norm = s.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < m; ++j) s -= w.col(j).dot(s) * w.col(j);
    const double norm = s.norm();
    if (norm < kRankTol * original_norm)
      throw DegenerateConstraintsError(
          "linearly dependent constraint rows in the path");
    w.col(m) = s / norm;
    const double proj = w.col(m).dot(fit.z);
    rss[m + 1] = rss[m] + proj * proj;
  }
  return rss;
}

int gic_select(const NestedPath& path, double r_n, int n) {
  const int count = static_cast<int>(path.rss.size());
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int m = 0; m < count; ++m) {
    if (!path.step_ok.empty() && !path.step_ok[m]) continue;
    if (!(path.rss[m] > 0.0))
      throw ZeroRssError("exact fit on the path: log RSS undefined at step " +
                         std::to_string(m));
    const double value = n * std::log(path.rss[m]) + path.sizes[m] * r_n;
    if (value <= best_value) {  // ties go to the smaller model
      best_value = value;
      best = m;
    }
  }
  return best;
}

double gaussian_gic(double rss, int q, int n, double r_n) {
  return n * std::log(2.0 * std::numbers::pi * rss / n) + n + r_n * (q + 1);
}

SelectionResult dmr(const DesignMatrix& design, const Vector& y,
                    const DmrConfig& config) {
  const int n = design.n();
  const int p = design.p();
  const double r_n = config.penalty.value_or(std::log(n));

  const FullModelFit fit = fit_full_model(design, y);

  SelectionResult result;
  result.criterion = config.penalty ? "gic" : "bic";
  result.penalty = r_n;

  std::vector<PathStep> steps;
  if (p > 1) {
    const TStatistics stats = t_statistics(fit, design.shape);
    for (const auto& diss : stats.factor)
      result.dendrograms.push_back(cluster_factor(diss, config.linkage));
    steps = assemble_path(stats, result.dendrograms, design.shape);
  }

  NestedPath path;
  path.rss = rss_path(fit, steps, design.shape);
  path.heights = Vector::Zero(p);
  for (int m = 0; m < p - 1; ++m) {
    path.heights[m + 1] = steps[m].height;
    path.constraints.push_back(steps[m].constraint);
  }
  path.sizes.resize(p);
  path.gic.resize(p);
  for (int m = 0; m < p; ++m) {
    path.sizes[m] = p - m;
    path.gic[m] = gaussian_gic(path.rss[m], path.sizes[m], n, r_n);
  }

  result.selected_step = gic_select(path, r_n, n);
  result.path = std::move(path);
  result.model = constraints_to_model(
      std::span(result.path.constraints)
          .first(static_cast<std::size_t>(result.selected_step)),
      design.shape);
  result.beta = constrained_fit(design, y, result.model).beta;
  return result;
}

}  // namespace dmr
