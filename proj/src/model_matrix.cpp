#include "dmrselect/model_matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>

namespace dmr {

int DesignShape::column_of(int block, int index) const {
  if (block == 0) return index;  // 0 = intercept, 1..p0 continuous
  int col = 1 + p0;
  for (int k = 1; k < block; ++k) col += level_counts[k - 1] - 1;
  return col + (index - 2);  // factor levels start at 2
}

std::pair<int, int> DesignShape::param_of(int column) const {
  if (column <= p0) return {0, column};
  int col = 1 + p0;
  for (int k = 1; k <= n_factors(); ++k) {
    const int width = level_counts[k - 1] - 1;
    if (column < col + width) return {k, 2 + (column - col)};
    col += width;
  }
  throw InvalidConstraintError("design column out of range: " +
                               std::to_string(column));
}

std::string DesignMatrix::column_name(int column) const {
  const auto [block, index] = shape.param_of(column);
  if (block == 0) {
    if (index == 0) return "(Intercept)";
    if (static_cast<std::size_t>(index - 1) < continuous_names.size())
      return continuous_names[index - 1];
    return "x" + std::to_string(index);
  }
  std::string fname = static_cast<std::size_t>(block - 1) < factor_names.size()
                          ? factor_names[block - 1]
                          : "f" + std::to_string(block);
  std::string level = static_cast<std::size_t>(block - 1) < factor_levels.size()
                          ? factor_levels[block - 1][index - 1]
                          : std::to_string(index);
  return fname + ":" + level;
}

namespace {

double parse_number(const std::string& cell, const std::string& column,
                    std::size_t row) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ValidationError("row " + std::to_string(row + 2) + ": column '" +
                          column + "' has non-numeric value '" + cell + "'");
  }
  return value;
}

// Full-column-rank check via column-pivoted QR; names the first column whose
// pivot falls under the relative tolerance.
void check_full_rank(const DesignMatrix& design) {
  Eigen::ColPivHouseholderQR<Matrix> qr(design.values);
  qr.setThreshold(kRankTol);
  if (qr.rank() == design.p()) return;
  const auto perm = qr.colsPermutation().indices();
  const int offender = perm[qr.rank()];
  throw RankDeficientError("design matrix is rank deficient (rank " +
                           std::to_string(qr.rank()) + " < " +
                           std::to_string(design.p()) + "); column '" +
                           design.column_name(offender) + "' is redundant");
}

}  // namespace

std::pair<DesignMatrix, Vector> build_design_matrix(
    const DataTable& data, const std::vector<ColumnSpec>& specs) {
  const std::size_t n = data.rows();

  std::unordered_map<std::string, int> by_name;
  for (std::size_t c = 0; c < data.names.size(); ++c)
    by_name.emplace(data.names[c], static_cast<int>(c));

  DesignMatrix design;
  Vector y;
  std::vector<std::pair<const ColumnSpec*, int>> continuous;
  std::vector<std::pair<const ColumnSpec*, int>> factors;
  const ColumnSpec* response = nullptr;
  int response_col = -1;

  for (const auto& spec : specs) {
    const auto it = by_name.find(spec.name);
    if (it == by_name.end())
      throw ValidationError("column '" + spec.name + "' not present in data");
    switch (spec.kind) {
      case ColumnKind::Response:
        if (response != nullptr)
          throw ValidationError("more than one response column declared");
        response = &spec;
        response_col = it->second;
        break;
      case ColumnKind::Continuous:
        continuous.emplace_back(&spec, it->second);
        break;
      case ColumnKind::Factor:
        if (spec.levels.empty())
          throw ValidationError("factor '" + spec.name +
                                "' has an empty level list");
        factors.emplace_back(&spec, it->second);
        break;
    }
  }
  if (response == nullptr)
    throw ValidationError("no response column declared");

  DesignShape shape;
  shape.p0 = static_cast<int>(continuous.size());
  for (const auto& [spec, col] : factors) {
    if (spec->levels.size() < 2)
      throw ValidationError("factor '" + spec->name +
                            "' needs at least two levels");
    shape.level_counts.push_back(static_cast<int>(spec->levels.size()));
  }
  const int p = shape.param_count();
  if (n <= static_cast<std::size_t>(p))
    throw TooFewRowsError("need more rows than parameters: n = " +
                          std::to_string(n) + ", p = " + std::to_string(p));

  design.shape = shape;
  design.values = Matrix::Zero(static_cast<int>(n), p);
  design.values.col(0).setOnes();

  y.resize(static_cast<int>(n));
  for (std::size_t r = 0; r < n; ++r)
    y[static_cast<int>(r)] =
        parse_number(data.columns[response_col][r], response->name, r);

  for (std::size_t c = 0; c < continuous.size(); ++c) {
    const auto& [spec, col] = continuous[c];
    design.continuous_names.push_back(spec->name);
    for (std::size_t r = 0; r < n; ++r)
      design.values(static_cast<int>(r), 1 + static_cast<int>(c)) =
          parse_number(data.columns[col][r], spec->name, r);
  }

  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto& [spec, col] = factors[k];
    design.factor_names.push_back(spec->name);
    design.factor_levels.push_back(spec->levels);
    std::unordered_map<std::string, int> level_of;  // label -> 1-based level
    for (std::size_t l = 0; l < spec->levels.size(); ++l) {
      if (!level_of.emplace(spec->levels[l], static_cast<int>(l) + 1).second)
        throw ValidationError("factor '" + spec->name +
                              "' has duplicate level '" + spec->levels[l] +
                              "'");
    }
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& cell = data.columns[col][r];
      const auto it = level_of.find(cell);
      if (it == level_of.end())
        throw UnknownLevelError("row " + std::to_string(r + 2) + ": factor '" +
                                spec->name + "' has undeclared level '" + cell +
                                "'");
      if (it->second >= 2)
        design.values(static_cast<int>(r),
                      shape.column_of(static_cast<int>(k) + 1, it->second)) =
            1.0;
    }
  }

  check_full_rank(design);
  return {std::move(design), std::move(y)};
}

DesignMatrix make_design(const Matrix& continuous,
                         const std::vector<std::vector<int>>& factor_codes,
                         const std::vector<int>& level_counts) {
  DesignMatrix design;
  design.shape.p0 = static_cast<int>(continuous.cols());
  design.shape.level_counts = level_counts;

  const int n = !factor_codes.empty()
                    ? static_cast<int>(factor_codes[0].size())
                    : static_cast<int>(continuous.rows());
  const int p = design.shape.param_count();
  design.values = Matrix::Zero(n, p);
  design.values.col(0).setOnes();
  if (continuous.cols() > 0)
    design.values.block(0, 1, n, continuous.cols()) = continuous;

  for (std::size_t k = 0; k < factor_codes.size(); ++k) {
    const int pk = level_counts[k];
    for (int r = 0; r < n; ++r) {
      const int level = factor_codes[k][r];
      if (level < 1 || level > pk)
        throw UnknownLevelError("factor " + std::to_string(k + 1) +
                                ": level code " + std::to_string(level) +
                                " outside 1.." + std::to_string(pk));
      if (level >= 2)
        design.values(r, design.shape.column_of(static_cast<int>(k) + 1,
                                                level)) = 1.0;
    }
  }
  return design;
}

FullModelFit fit_full_model(const DesignMatrix& design, const Vector& y) {
  const int n = design.n();
  const int p = design.p();
  if (n <= p)
    throw TooFewRowsError("need n > p: n = " + std::to_string(n) +
                          ", p = " + std::to_string(p));

  Eigen::HouseholderQR<Matrix> qr(design.values);
  Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Vector z = (qr.householderQ().adjoint() * y).head(p);

  // Fix the sign convention: diag(R) > 0.
  for (int i = 0; i < p; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) = -r.row(i);
      z[i] = -z[i];
    }
  }

  const double max_diag = r.diagonal().cwiseAbs().maxCoeff();
  for (int i = 0; i < p; ++i) {
    if (std::abs(r(i, i)) < kRankTol * max_diag) {
      throw RankDeficientError(
          "full model matrix is rank deficient near column '" +
          design.column_name(i) + "'");
    }
  }

  FullModelFit fit;
  fit.n = n;
  fit.p = p;
  fit.r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  fit.z = z;
  fit.beta_hat = fit.r_inv * z;
  fit.y_sq_norm = y.squaredNorm();
  fit.rss = std::max(0.0, fit.y_sq_norm - z.squaredNorm());
  // |y|^2 - |z|^2 carries a rounding error of order eps |y|^2, so residuals
  // below that are indistinguishable from an exact fit.
  if (fit.rss < 1e-13 * fit.y_sq_norm) fit.rss = 0.0;
  fit.sigma2_hat = fit.rss / static_cast<double>(n - p);
  return fit;
}

}  // namespace dmr
