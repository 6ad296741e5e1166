#pragma once

#include <span>
#include <vector>

#include "dmrselect/model_matrix.hpp"
#include "dmrselect/types.hpp"

namespace dmr {

// A single linear restriction: either a coefficient is zero (Delete) or two
// coefficients of one factor are equal (Merge).  Merging a level with the
// reference level 1 is the same restriction as deleting that coefficient,
// and is normalized to Merge{1, j} here.
struct ElementaryConstraint {
  enum class Kind { Delete, Merge };

  Kind kind = Kind::Delete;
  int block = 0;  // 0 = continuous block, >= 1 = factor index
  int i = 0;      // Merge only: smaller level
  int j = 0;      // Delete: parameter index; Merge: larger level

  static ElementaryConstraint deletion(int block, int index) {
    return {Kind::Delete, block, 0, index};
  }
  static ElementaryConstraint merge(int factor, int a, int b) {
    if (a > b) std::swap(a, b);
    return {Kind::Merge, factor, a, b};
  }

  // Factor-level deletions become merges with the reference level; merge
  // endpoints are ordered.  Canonical constraints compare by value.
  ElementaryConstraint canonical() const;

  bool operator==(const ElementaryConstraint& o) const {
    return kind == o.kind && block == o.block && i == o.i && j == o.j;
  }
};

using Cluster = std::vector<int>;      // levels, ascending
using Partition = std::vector<Cluster>;  // clusters ordered by minimum

// A feasible model: retained continuous variables plus one set-partition of
// {1..p_k} per factor.  The cluster containing level 1 is the zero cluster.
// Stored in canonical form, so equality is structural.
struct FeasibleModel {
  std::vector<int> retained_continuous;  // ascending, values in 1..p0
  std::vector<Partition> partitions;     // one per factor

  int size(const DesignShape& shape) const;  // |M| = model dimension
  bool operator==(const FeasibleModel& o) const = default;
};

FeasibleModel full_model(const DesignShape& shape);

// Finest feasible model consistent with a constraint set: merges are closed
// transitively, factor deletions join the reference cluster.  Throws
// InvalidConstraintError for out-of-range indices.
FeasibleModel constraints_to_model(std::span<const ElementaryConstraint> cs,
                                   const DesignShape& shape);

// Canonical generating constraint set of a model: one deletion per dropped
// continuous variable, one merge (with the cluster minimum) per non-minimal
// cluster member.  constraints_to_model over this set reproduces the model.
std::vector<ElementaryConstraint> model_constraints(const FeasibleModel& model,
                                                    const DesignShape& shape);

// Constraint system in regular form: after permuting parameters so the kept
// ones (intercept, retained continuous, cluster representatives) come first,
// the stacked matrix [A1; A0] is [[I, 0], [B, I]] with B in {-1, 0, 1}.
struct RegularConstraintSystem {
  std::vector<int> perm;   // permuted position -> original design column
  int q = 0;               // model size = number of kept parameters
  // For each trailing (constrained) parameter: the kept-parameter position
  // its value copies, or -1 when the coefficient is zero.
  std::vector<int> source;

  int p() const { return static_cast<int>(perm.size()); }

  Matrix a0_permuted() const;  // (p-q) x p, equals [B | I]
  Matrix a1_permuted() const;  // p x q, equals [I ; -B]
  Matrix a0_original() const;  // columns mapped back to design order
  Matrix a1_original() const;
};

RegularConstraintSystem regularize(const FeasibleModel& model,
                                   const DesignShape& shape);

// Z1 = X * A1, computed by selecting and summing design columns rather than
// multiplying dense matrices.
Matrix reduced_design(const DesignMatrix& design,
                      const RegularConstraintSystem& sys);

struct ConstrainedFit {
  Vector beta;  // length p, in design coordinates; constraints hold exactly
  double rss = 0.0;
};

// Least squares restricted to the model subspace, via QR of the reduced
// design.  Throws RankDeficientError when Z1 loses rank (e.g. a merged
// cluster with no observations).
ConstrainedFit constrained_fit(const DesignMatrix& design, const Vector& y,
                               const FeasibleModel& model);

// dim(L_{M1} ∩ L_{M2}) = p - rank([A0_{M1}; A0_{M2}]).
int model_intersection_dim(const FeasibleModel& m1, const FeasibleModel& m2,
                           const DesignShape& shape);

}  // namespace dmr
