// Test-side oracles, independent of the library's computation paths, plus
// random instance generators.  Everything here is deliberately naive: dense
// algebra, explicit enumeration, textbook algorithms.
#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "dmrselect/constraints.hpp"
#include "dmrselect/model_matrix.hpp"
#include "dmrselect/rng.hpp"

namespace oracle {

using dmr::Matrix;
using dmr::Vector;

// Least squares through the normal equations; an independent route to the
// projection of y onto the column space.
inline Vector normal_equations_beta(const Matrix& x, const Vector& y) {
  return (x.transpose() * x).ldlt().solve(x.transpose() * y);
}

// Dense hat matrix H = Z (Z^T Z)^{-1} Z^T.
inline Matrix hat_matrix(const Matrix& z) {
  return z * (z.transpose() * z).ldlt().solve(z.transpose());
}

// Transitive closure of merge pairs by fixpoint iteration over cluster sets.
inline std::vector<std::vector<int>> closure_partition(
    int levels, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<std::set<int>> clusters;
  for (int l = 1; l <= levels; ++l) clusters.push_back({l});
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [a, b] : pairs) {
      std::size_t ia = 0, ib = 0;
      for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (clusters[i].count(a)) ia = i;
        if (clusters[i].count(b)) ib = i;
      }
      if (ia != ib) {
        clusters[std::min(ia, ib)].insert(clusters[std::max(ia, ib)].begin(),
                                          clusters[std::max(ia, ib)].end());
        clusters.erase(clusters.begin() + static_cast<long>(std::max(ia, ib)));
        changed = true;
      }
    }
  }
  std::vector<std::vector<int>> out;
  for (const auto& c : clusters) out.emplace_back(c.begin(), c.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Textbook agglomerative clustering that recomputes every inter-cluster
// distance from the raw matrix at every step (no Lance-Williams update).
// linkage b: distance = b * min + (1 - b) * max over cross pairs.
struct ReferenceMerge {
  double height;
  int min_a, min_b;
};

inline std::vector<ReferenceMerge> reference_clustering(const Matrix& d,
                                                        double b) {
  const int n = static_cast<int>(d.rows());
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < n; ++i) clusters.push_back({i + 1});
  std::vector<ReferenceMerge> merges;
  auto dist = [&](const std::vector<int>& ca, const std::vector<int>& cb) {
    double lo = 1e300, hi = -1e300;
    for (int i : ca)
      for (int j : cb) {
        lo = std::min(lo, d(i - 1, j - 1));
        hi = std::max(hi, d(i - 1, j - 1));
      }
    return b * lo + (1 - b) * hi;
  };
  while (clusters.size() > 1) {
    double best = 1e300;
    std::size_t ba = 0, bb = 1;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double v = dist(clusters[i], clusters[j]);
        if (v < best) {
          best = v;
          ba = i;
          bb = j;
        }
      }
    merges.push_back({best, clusters[ba][0], clusters[bb][0]});
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(),
                        clusters[bb].end());
    std::sort(clusters[ba].begin(), clusters[ba].end());
    clusters.erase(clusters.begin() + static_cast<long>(bb));
  }
  return merges;
}

// All set partitions of {1..n} via restricted growth strings.
inline std::vector<std::vector<std::vector<int>>> all_partitions(int n) {
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<int> rgs(n, 0);
  while (true) {
    const int blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
    std::vector<std::vector<int>> part(blocks);
    for (int i = 0; i < n; ++i) part[rgs[i]].push_back(i + 1);
    out.push_back(part);
    // next restricted growth string
    int i = n - 1;
    for (; i > 0; --i) {
      const int cap = 1 + *std::max_element(rgs.begin(), rgs.begin() + i);
      if (rgs[i] < cap) break;
    }
    if (i == 0) break;
    ++rgs[i];
    std::fill(rgs.begin() + i + 1, rgs.end(), 0);
  }
  return out;
}

// Every feasible model of a shape: all subsets of continuous variables
// crossed with all partitions per factor.
inline std::vector<dmr::FeasibleModel> all_feasible_models(
    const dmr::DesignShape& shape) {
  std::vector<dmr::FeasibleModel> out;
  std::vector<std::vector<dmr::Partition>> per_factor;
  for (int pk : shape.level_counts) {
    std::vector<dmr::Partition> ps;
    for (const auto& part : all_partitions(pk)) {
      dmr::Partition partition = part;
      std::sort(partition.begin(), partition.end());
      ps.push_back(partition);
    }
    per_factor.push_back(ps);
  }
  const int subsets = 1 << shape.p0;
  std::vector<std::size_t> index(per_factor.size(), 0);
  while (true) {
    for (int mask = 0; mask < subsets; ++mask) {
      dmr::FeasibleModel model;
      for (int j = 1; j <= shape.p0; ++j)
        if (mask & (1 << (j - 1))) model.retained_continuous.push_back(j);
      for (std::size_t k = 0; k < per_factor.size(); ++k)
        model.partitions.push_back(per_factor[k][index[k]]);
      out.push_back(std::move(model));
    }
    std::size_t k = 0;
    for (; k < per_factor.size(); ++k) {
      if (++index[k] < per_factor[k].size()) break;
      index[k] = 0;
    }
    if (k == per_factor.size()) break;
  }
  return out;
}

// Random full-rank design with every factor level occupied.
struct RandomInstance {
  dmr::DesignMatrix design;
  Vector y;
};

inline dmr::DesignMatrix random_design(dmr::Rng& rng, int n, int p0,
                                       const std::vector<int>& level_counts) {
  Matrix continuous(n, p0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p0; ++j) continuous(i, j) = rng.normal();
  std::vector<std::vector<int>> codes;
  for (int pk : level_counts) {
    std::vector<int> col(n);
    for (int i = 0; i < n; ++i)
      col[i] = i < pk ? i + 1 : rng.uniform_int(1, pk);
    codes.push_back(col);
  }
  return dmr::make_design(continuous, codes, level_counts);
}

inline RandomInstance random_instance(dmr::Rng& rng, int n, int p0,
                                      const std::vector<int>& level_counts) {
  RandomInstance inst;
  inst.design = random_design(rng, n, p0, level_counts);
  Vector beta(inst.design.p());
  for (int c = 0; c < beta.size(); ++c) beta[c] = 2.0 * rng.normal();
  inst.y = inst.design.values * beta;
  for (int i = 0; i < n; ++i) inst.y[i] += rng.normal();
  return inst;
}

// Random feasible model on a shape.
inline dmr::FeasibleModel random_model(dmr::Rng& rng,
                                       const dmr::DesignShape& shape) {
  dmr::FeasibleModel model;
  for (int j = 1; j <= shape.p0; ++j)
    if (rng.bernoulli(0.6)) model.retained_continuous.push_back(j);
  for (int pk : shape.level_counts) {
    // random restricted growth string
    std::vector<int> rgs(pk, 0);
    int mx = 0;
    for (int i = 1; i < pk; ++i) {
      rgs[i] = rng.uniform_int(0, mx + 1);
      mx = std::max(mx, rgs[i]);
    }
    dmr::Partition part(mx + 1);
    for (int i = 0; i < pk; ++i) part[rgs[i]].push_back(i + 1);
    std::sort(part.begin(), part.end());
    model.partitions.push_back(part);
  }
  return model;
}

}  // namespace oracle
