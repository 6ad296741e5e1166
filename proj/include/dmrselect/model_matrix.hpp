#pragma once

#include <string>
#include <vector>

#include "dmrselect/types.hpp"

namespace dmr {

enum class ColumnKind { Response, Continuous, Factor };

// Declared role of one input column.  For factors the level list is ordered
// and the first entry is the reference level.
struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::vector<std::string> levels;  // factors only
};

// Column-major table of raw cells, as read from CSV.  Continuous columns are
// parsed on demand by build_design_matrix.
struct DataTable {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  std::size_t cols() const { return columns.size(); }
};

// Shape of the design matrix: which column encodes which parameter.
//
// Parameters are addressed (block, index) the usual way for a model with an
// intercept, p0 continuous regressors and l factors: block 0 holds the
// intercept (index 0) and the continuous coefficients (index 1..p0); block
// k >= 1 holds the coefficients of factor k for levels 2..p_k, level 1 being
// the reference absorbed into the intercept.
struct DesignShape {
  int p0 = 0;
  std::vector<int> level_counts;  // p_k per factor, each >= 2

  int n_factors() const { return static_cast<int>(level_counts.size()); }

  int param_count() const {
    int p = 1 + p0;
    for (int pk : level_counts) p += pk - 1;
    return p;
  }

  // Design-matrix column of parameter (block, index).
  int column_of(int block, int index) const;

  // Inverse of column_of: (block, index) for column c.
  std::pair<int, int> param_of(int column) const;
};

// Full-rank model matrix [1 | X0 | X1 | ... | Xl] with factor metadata.
// Name/label fields are empty when the matrix was assembled programmatically.
struct DesignMatrix {
  Matrix values;  // n x p
  DesignShape shape;

  std::vector<std::string> continuous_names;
  std::vector<std::string> factor_names;
  std::vector<std::vector<std::string>> factor_levels;

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }

  // Human-readable name for a design column ("(Intercept)", "x1", "f:B").
  std::string column_name(int column) const;
};

// QR-derived quantities of the unconstrained least-squares fit.  Everything
// downstream (t-statistics, the path recursion) reads from here.
struct FullModelFit {
  Matrix r_inv;       // p x p upper triangular, inverse of R
  Vector z;           // Q^T y
  Vector beta_hat;    // R^{-1} z
  double sigma2_hat;  // (|y|^2 - |z|^2) / (n - p)
  double y_sq_norm;
  double rss;         // |y|^2 - |z|^2
  int n = 0;
  int p = 0;
};

// Encode a typed table into a design matrix plus response vector.
// Throws ValidationError subclasses on schema problems (unknown level,
// unparsable number, n <= p) and RankDeficientError when the encoded matrix
// does not have full column rank.
std::pair<DesignMatrix, Vector> build_design_matrix(
    const DataTable& data, const std::vector<ColumnSpec>& specs);

// Assemble a design matrix from numeric blocks: continuous values (may have
// zero columns) and one 1-based level code per observation and factor.
DesignMatrix make_design(const Matrix& continuous,
                         const std::vector<std::vector<int>>& factor_codes,
                         const std::vector<int>& level_counts);

// Thin QR fit of the full model.  The factorization sign convention is fixed
// (diag(R) > 0) so z and R^{-1} are reproducible.  Throws RankDeficientError
// when a diagonal entry of R falls below the relative tolerance.
FullModelFit fit_full_model(const DesignMatrix& design, const Vector& y);

}  // namespace dmr
