#include "dmrselect/constraints.hpp"

#include <algorithm>
#include <numeric>

namespace dmr {

ElementaryConstraint ElementaryConstraint::canonical() const {
  if (kind == Kind::Delete && block >= 1) return merge(block, 1, j);
  return *this;
}

int FeasibleModel::size(const DesignShape& shape) const {
  (void)shape;
  int q = 1 + static_cast<int>(retained_continuous.size());
  for (const auto& partition : partitions)
    q += static_cast<int>(partition.size()) - 1;
  return q;
}

FeasibleModel full_model(const DesignShape& shape) {
  FeasibleModel model;
  model.retained_continuous.resize(shape.p0);
  std::iota(model.retained_continuous.begin(), model.retained_continuous.end(),
            1);
  for (int pk : shape.level_counts) {
    Partition partition;
    for (int level = 1; level <= pk; ++level) partition.push_back({level});
    model.partitions.push_back(std::move(partition));
  }
  return model;
}

namespace {

// Minimal union-find over levels 1..pk.
struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int count) : parent(count + 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;  // smaller index becomes the representative
  }
};

Partition canonical_partition(UnionFind& uf, int pk) {
  std::vector<Cluster> by_root(pk + 1);
  for (int level = 1; level <= pk; ++level)
    by_root[uf.find(level)].push_back(level);
  Partition partition;
  for (int root = 1; root <= pk; ++root)
    if (!by_root[root].empty()) partition.push_back(std::move(by_root[root]));
  return partition;  // roots are cluster minima, so order is by minimum
}

void check_factor_level(const DesignShape& shape, int block, int level,
                        int lowest) {
  if (block < 1 || block > shape.n_factors())
    throw InvalidConstraintError("factor index " + std::to_string(block) +
                                 " out of range");
  const int pk = shape.level_counts[block - 1];
  if (level < lowest || level > pk)
    throw InvalidConstraintError("level " + std::to_string(level) +
                                 " out of range for factor " +
                                 std::to_string(block));
}

}  // namespace

FeasibleModel constraints_to_model(std::span<const ElementaryConstraint> cs,
                                   const DesignShape& shape) {
  std::vector<bool> dropped(shape.p0 + 1, false);
  std::vector<UnionFind> factors;
  factors.reserve(shape.level_counts.size());
  for (int pk : shape.level_counts) factors.emplace_back(pk);

  for (const auto& raw : cs) {
    const auto c = raw.canonical();
    if (c.kind == ElementaryConstraint::Kind::Delete) {
      if (c.j < 1 || c.j > shape.p0)
        throw InvalidConstraintError("continuous index " +
                                     std::to_string(c.j) + " out of range");
      dropped[c.j] = true;
    } else {
      check_factor_level(shape, c.block, c.i, 1);
      check_factor_level(shape, c.block, c.j, 1);
      if (c.i == c.j)
        throw InvalidConstraintError("merge of a level with itself");
      factors[c.block - 1].unite(c.i, c.j);
    }
  }

  FeasibleModel model;
  for (int j = 1; j <= shape.p0; ++j)
    if (!dropped[j]) model.retained_continuous.push_back(j);
  for (std::size_t k = 0; k < factors.size(); ++k)
    model.partitions.push_back(
        canonical_partition(factors[k], shape.level_counts[k]));
  return model;
}

std::vector<ElementaryConstraint> model_constraints(const FeasibleModel& model,
                                                    const DesignShape& shape) {
  std::vector<ElementaryConstraint> cs;
  std::vector<bool> kept(shape.p0 + 1, false);
  for (int j : model.retained_continuous) kept[j] = true;
  for (int j = 1; j <= shape.p0; ++j)
    if (!kept[j]) cs.push_back(ElementaryConstraint::deletion(0, j));
  for (std::size_t k = 0; k < model.partitions.size(); ++k) {
    for (const auto& cluster : model.partitions[k]) {
      for (std::size_t m = 1; m < cluster.size(); ++m)
        cs.push_back(ElementaryConstraint::merge(static_cast<int>(k) + 1,
                                                 cluster[0], cluster[m]));
    }
  }
  return cs;
}

RegularConstraintSystem regularize(const FeasibleModel& model,
                                   const DesignShape& shape) {
  RegularConstraintSystem sys;
  const int p = shape.param_count();

  // Kept parameters first: intercept, retained continuous, then the minimal
  // member of every non-reference cluster, factor by factor.
  sys.perm.reserve(p);
  sys.perm.push_back(shape.column_of(0, 0));
  for (int j : model.retained_continuous) sys.perm.push_back(shape.column_of(0, j));
  for (std::size_t k = 0; k < model.partitions.size(); ++k) {
    for (const auto& cluster : model.partitions[k]) {
      if (cluster[0] == 1) continue;  // reference cluster: zero coefficients
      sys.perm.push_back(
          shape.column_of(static_cast<int>(k) + 1, cluster[0]));
    }
  }
  sys.q = static_cast<int>(sys.perm.size());

  // Trailing parameters: dropped continuous, then non-minimal cluster
  // members.  `source` records which kept parameter each one copies.
  std::vector<bool> kept_cont(shape.p0 + 1, false);
  for (int j : model.retained_continuous) kept_cont[j] = true;
  for (int j = 1; j <= shape.p0; ++j) {
    if (!kept_cont[j]) {
      sys.perm.push_back(shape.column_of(0, j));
      sys.source.push_back(-1);
    }
  }
  for (std::size_t k = 0; k < model.partitions.size(); ++k) {
    for (const auto& cluster : model.partitions[k]) {
      const bool reference = cluster[0] == 1;
      int rep_position = -1;
      if (!reference) {
        const int rep_col =
            shape.column_of(static_cast<int>(k) + 1, cluster[0]);
        rep_position = static_cast<int>(
            std::find(sys.perm.begin(), sys.perm.begin() + sys.q, rep_col) -
            sys.perm.begin());
      }
      for (std::size_t m = 1; m < cluster.size(); ++m) {
        sys.perm.push_back(
            shape.column_of(static_cast<int>(k) + 1, cluster[m]));
        sys.source.push_back(rep_position);
      }
    }
  }
  return sys;
}

Matrix RegularConstraintSystem::a0_permuted() const {
  const int total = p();
  Matrix a0 = Matrix::Zero(total - q, total);
  for (int t = 0; t < total - q; ++t) {
    a0(t, q + t) = 1.0;
    if (source[t] >= 0) a0(t, source[t]) = -1.0;
  }
  return a0;
}

Matrix RegularConstraintSystem::a1_permuted() const {
  const int total = p();
  Matrix a1 = Matrix::Zero(total, q);
  for (int s = 0; s < q; ++s) a1(s, s) = 1.0;
  for (int t = 0; t < total - q; ++t)
    if (source[t] >= 0) a1(q + t, source[t]) = 1.0;
  return a1;
}

Matrix RegularConstraintSystem::a0_original() const {
  const Matrix permuted = a0_permuted();
  Matrix original = Matrix::Zero(permuted.rows(), permuted.cols());
  for (int c = 0; c < permuted.cols(); ++c)
    original.col(perm[c]) = permuted.col(c);
  return original;
}

Matrix RegularConstraintSystem::a1_original() const {
  const Matrix permuted = a1_permuted();
  Matrix original = Matrix::Zero(permuted.rows(), permuted.cols());
  for (int r = 0; r < permuted.rows(); ++r)
    original.row(perm[r]) = permuted.row(r);
  return original;
}

Matrix reduced_design(const DesignMatrix& design,
                      const RegularConstraintSystem& sys) {
  const int n = design.n();
  Matrix z1 = Matrix::Zero(n, sys.q);
  for (int s = 0; s < sys.q; ++s) z1.col(s) = design.values.col(sys.perm[s]);
  for (std::size_t t = 0; t < sys.source.size(); ++t) {
    if (sys.source[t] >= 0)
      z1.col(sys.source[t]) +=
          design.values.col(sys.perm[sys.q + static_cast<int>(t)]);
  }
  return z1;
}

ConstrainedFit constrained_fit(const DesignMatrix& design, const Vector& y,
                               const FeasibleModel& model) {
  const auto sys = regularize(model, design.shape);
  const Matrix z1 = reduced_design(design, sys);
  const int q = sys.q;

  Eigen::HouseholderQR<Matrix> qr(z1);
  const Matrix r = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  const double max_diag = r.diagonal().cwiseAbs().maxCoeff();
  for (int i = 0; i < q; ++i) {
    if (std::abs(r(i, i)) < kRankTol * max_diag)
      throw RankDeficientError(
          "reduced design lost rank (empty cell after merging?)");
  }
  const Vector qty = (qr.householderQ().adjoint() * y).head(q);
  const Vector xi = r.triangularView<Eigen::Upper>().solve(qty);

  ConstrainedFit fit;
  fit.rss = (y - z1 * xi).squaredNorm();
  // beta = A1 xi, scattered back to design coordinates; merged coefficients
  // are copies of one value, deleted ones exact zeros.
  fit.beta = Vector::Zero(design.p());
  for (int s = 0; s < q; ++s) fit.beta[sys.perm[s]] = xi[s];
  for (std::size_t t = 0; t < sys.source.size(); ++t)
    if (sys.source[t] >= 0)
      fit.beta[sys.perm[q + static_cast<int>(t)]] = xi[sys.source[t]];
  return fit;
}

int model_intersection_dim(const FeasibleModel& m1, const FeasibleModel& m2,
                           const DesignShape& shape) {
  const Matrix a1 = regularize(m1, shape).a0_original();
  const Matrix a2 = regularize(m2, shape).a0_original();
  const int p = shape.param_count();
  if (a1.rows() + a2.rows() == 0) return p;
  Matrix stacked(a1.rows() + a2.rows(), p);
  stacked << a1, a2;
  Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
  qr.setThreshold(kRankTol);
  return p - static_cast<int>(qr.rank());
}

}  // namespace dmr
