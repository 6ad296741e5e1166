#pragma once

#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmrselect/core.hpp"
#include "dmrselect/glm.hpp"
#include "dmrselect/model_matrix.hpp"

namespace dmr {

// RFC 4180 CSV with a header row: quoted fields, doubled quotes, CR LF or
// LF line endings.  Throws ValidationError with a line number on ragged or
// malformed rows.
DataTable read_csv(std::istream& in);

// Column roles as given on the command line.  Factors may carry an explicit
// ordered level list (first = reference); otherwise levels are taken in
// order of first appearance in the data.
struct Schema {
  std::string response;
  std::vector<std::pair<std::string, std::vector<std::string>>> factors;
};

std::vector<ColumnSpec> resolve_schema(const DataTable& data,
                                       const Schema& schema);

// JSON report of one selection run: chosen partitions (level labels),
// retained continuous variables, coefficients, the full path table and the
// per-factor merge lists.  format_version "1".
nlohmann::json selection_report(const DesignMatrix& design,
                                const SelectionResult& result, Family family);

// Path table only, as CSV (step,height,constraint,rss,gic,size).
std::string path_csv(const DesignMatrix& design, const SelectionResult& result);

}  // namespace dmr
