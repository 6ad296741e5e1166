#include "dmrselect/io.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

namespace dmr {

namespace {

// One RFC 4180 record; handles quoted fields, doubled quotes and CR LF.
// Returns false at end of input.  Quoted fields may span lines, in which
// case `line` is advanced past the embedded newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields,
                 std::size_t& line) {
  fields.clear();
  if (in.peek() == EOF) return false;

  std::string field;
  bool quoted = false;
  bool field_started = false;
  while (true) {
    const int ch = in.get();
    if (ch == EOF) {
      fields.push_back(field);
      return true;
    }
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(static_cast<char>(ch));
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      fields.push_back(field);
      field.clear();
      field_started = false;
    } else if (ch == '\r') {
      // the newline that follows ends the record
    } else if (ch == '\n') {
      ++line;
      fields.push_back(field);
      return true;
    } else {
      field.push_back(static_cast<char>(ch));
      field_started = true;
    }
  }
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

nlohmann::json constraint_json(const DesignMatrix& design,
                               const ElementaryConstraint& raw) {
  const auto c = raw.canonical();
  nlohmann::json out;
  if (c.kind == ElementaryConstraint::Kind::Delete) {
    out["type"] = "delete";
    out["block"] = 0;
    out["index"] = c.j;
    out["term"] = design.column_name(design.shape.column_of(0, c.j));
  } else {
    out["type"] = "merge";
    out["block"] = c.block;
    out["i"] = c.i;
    out["j"] = c.j;
    if (static_cast<std::size_t>(c.block - 1) < design.factor_names.size()) {
      out["factor"] = design.factor_names[c.block - 1];
      out["levels"] = {design.factor_levels[c.block - 1][c.i - 1],
                       design.factor_levels[c.block - 1][c.j - 1]};
    }
  }
  return out;
}

std::string factor_name_of(const DesignMatrix& design, std::size_t k) {
  return k < design.factor_names.size() ? design.factor_names[k]
                                        : "f" + std::to_string(k + 1);
}

std::string level_label(const DesignMatrix& design, std::size_t k, int level) {
  if (k < design.factor_levels.size())
    return design.factor_levels[k][level - 1];
  return std::to_string(level);
}

}  // namespace

DataTable read_csv(std::istream& in) {
  DataTable table;
  std::size_t line = 1;
  std::vector<std::string> fields;
  if (!read_record(in, fields, line))
    throw ValidationError("line 1: empty input, expected a CSV header");
  std::unordered_set<std::string> seen;
  for (auto& name : fields) {
    if (!seen.insert(name).second)
      throw ValidationError("line 1: duplicate column name '" + name + "'");
  }
  table.names = fields;
  table.columns.resize(fields.size());

  while (true) {
    const std::size_t record_line = line;
    if (!read_record(in, fields, line)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank
    if (fields.size() != table.names.size())
      throw ValidationError("line " + std::to_string(record_line) + ": got " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(table.names.size()));
    for (std::size_t c = 0; c < fields.size(); ++c)
      table.columns[c].push_back(std::move(fields[c]));
  }
  return table;
}

std::vector<ColumnSpec> resolve_schema(const DataTable& data,
                                       const Schema& schema) {
  if (schema.response.empty())
    throw ValidationError("no response column declared");

  std::vector<ColumnSpec> specs;
  std::unordered_set<std::string> declared_factors;
  for (const auto& [name, levels] : schema.factors) {
    if (!declared_factors.insert(name).second)
      throw ValidationError("factor '" + name + "' declared twice");
  }

  for (std::size_t c = 0; c < data.names.size(); ++c) {
    const std::string& name = data.names[c];
    ColumnSpec spec;
    spec.name = name;
    if (name == schema.response) {
      spec.kind = ColumnKind::Response;
    } else if (declared_factors.count(name)) {
      spec.kind = ColumnKind::Factor;
      const auto it = std::find_if(
          schema.factors.begin(), schema.factors.end(),
          [&](const auto& f) { return f.first == name; });
      spec.levels = it->second;
      if (spec.levels.empty()) {
        // Levels in order of first appearance; the first row's value becomes
        // the reference level.
        std::unordered_set<std::string> seen;
        for (const auto& cell : data.columns[c])
          if (seen.insert(cell).second) spec.levels.push_back(cell);
      }
    } else {
      spec.kind = ColumnKind::Continuous;
    }
    specs.push_back(std::move(spec));
  }

  const auto has = [&](const std::string& name) {
    return std::find(data.names.begin(), data.names.end(), name) !=
           data.names.end();
  };
  if (!has(schema.response))
    throw ValidationError("response column '" + schema.response +
                          "' not present in data");
  for (const auto& [name, levels] : schema.factors)
    if (!has(name))
      throw ValidationError("factor column '" + name + "' not present in data");
  return specs;
}

nlohmann::json selection_report(const DesignMatrix& design,
                                const SelectionResult& result, Family family) {
  nlohmann::json report;
  report["format_version"] = "1";
  report["family"] = family == Family::Binomial ? "binomial" : "gaussian";
  report["criterion"] = result.criterion;
  report["penalty"] = result.penalty;
  report["n"] = design.n();
  report["p"] = design.p();
  report["selected_step"] = result.selected_step;

  nlohmann::json selected;
  selected["size"] = result.model.size(design.shape);
  nlohmann::json retained = nlohmann::json::array();
  for (int j : result.model.retained_continuous)
    retained.push_back(design.column_name(design.shape.column_of(0, j)));
  selected["continuous"] = retained;

  nlohmann::json partitions = nlohmann::json::object();
  for (std::size_t k = 0; k < result.model.partitions.size(); ++k) {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& cluster : result.model.partitions[k]) {
      nlohmann::json members = nlohmann::json::array();
      for (int level : cluster) members.push_back(level_label(design, k, level));
      clusters.push_back(members);
    }
    partitions[factor_name_of(design, k)] = clusters;
  }
  selected["partitions"] = partitions;

  nlohmann::json coefficients = nlohmann::json::object();
  for (int c = 0; c < design.p(); ++c)
    coefficients[design.column_name(c)] = result.beta[c];
  selected["coefficients"] = coefficients;
  report["selected"] = selected;

  nlohmann::json path = nlohmann::json::array();
  const int p = design.p();
  for (int m = 0; m < p; ++m) {
    nlohmann::json step;
    step["step"] = m;
    step["height"] = result.path.heights[m];
    step["size"] = result.path.sizes[m];
    step["rss"] = result.path.rss[m];
    step["gic"] = result.path.gic[m];
    if (m == 0)
      step["constraint"] = nullptr;
    else
      step["constraint"] = constraint_json(design, result.path.constraints[m - 1]);
    if (!result.path.step_ok.empty()) step["converged"] = result.path.step_ok[m];
    path.push_back(step);
  }
  report["path"] = path;

  nlohmann::json dendrograms = nlohmann::json::object();
  for (const auto& trace : result.dendrograms) {
    nlohmann::json merges = nlohmann::json::array();
    const std::size_t k = static_cast<std::size_t>(trace.factor) - 1;
    int step_index = 1;
    for (const auto& merge : trace.merges) {
      nlohmann::json record;
      record["step"] = step_index++;
      nlohmann::json left = nlohmann::json::array();
      for (int level : merge.left) left.push_back(level_label(design, k, level));
      nlohmann::json right = nlohmann::json::array();
      for (int level : merge.right)
        right.push_back(level_label(design, k, level));
      record["left"] = left;
      record["right"] = right;
      record["height"] = merge.height;
      merges.push_back(record);
    }
    dendrograms[factor_name_of(design, k)] = merges;
  }
  report["dendrograms"] = dendrograms;
  return report;
}

std::string path_csv(const DesignMatrix& design, const SelectionResult& result) {
  std::string out = "step,height,constraint,rss,gic,size\n";
  const int p = design.p();
  for (int m = 0; m < p; ++m) {
    out += std::to_string(m);
    out += ',';
    out += format_double(result.path.heights[m]);
    out += ',';
    if (m > 0) {
      const auto c = result.path.constraints[m - 1].canonical();
      if (c.kind == ElementaryConstraint::Kind::Delete) {
        out += "delete " + design.column_name(design.shape.column_of(0, c.j));
      } else {
        const std::size_t k = static_cast<std::size_t>(c.block) - 1;
        out += "merge " + factor_name_of(design, k) + ":" +
               level_label(design, k, c.i) + "=" + level_label(design, k, c.j);
      }
    }
    out += ',';
    out += format_double(result.path.rss[m]);
    out += ',';
    out += format_double(result.path.gic[m]);
    out += ',';
    out += std::to_string(result.path.sizes[m]);
    out += '\n';
  }
  return out;
}

}  // namespace dmr
