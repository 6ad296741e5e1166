// Python bindings for the main operations: selection (gaussian and
// binomial), the synthetic experiment generators and the Monte Carlo runner.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "dmrselect/evaluation.hpp"
#include "dmrselect/glm.hpp"

namespace py = pybind11;
using namespace dmr;

namespace {

DesignMatrix design_from_args(const Matrix& continuous,
                              const std::vector<std::vector<int>>& factors,
                              const std::vector<int>& level_counts) {
  return make_design(continuous, factors, level_counts);
}

py::dict model_to_dict(const FeasibleModel& model) {
  py::dict out;
  out["continuous"] = model.retained_continuous;
  py::list partitions;
  for (const auto& partition : model.partitions) {
    py::list clusters;
    for (const auto& cluster : partition) clusters.append(cluster);
    partitions.append(clusters);
  }
  out["partitions"] = partitions;
  return out;
}

py::dict result_to_dict(const SelectionResult& result,
                        const DesignShape& shape) {
  py::dict out;
  out["model"] = model_to_dict(result.model);
  out["size"] = result.model.size(shape);
  out["beta"] = result.beta;
  out["selected_step"] = result.selected_step;
  out["criterion"] = result.criterion;
  out["penalty"] = result.penalty;
  out["heights"] = result.path.heights;
  out["rss"] = result.path.rss;
  out["gic"] = result.path.gic;

  py::list constraints;
  for (const auto& raw : result.path.constraints) {
    const auto c = raw.canonical();
    py::dict entry;
    entry["type"] =
        c.kind == ElementaryConstraint::Kind::Delete ? "delete" : "merge";
    entry["block"] = c.block;
    if (c.kind == ElementaryConstraint::Kind::Merge) entry["i"] = c.i;
    entry["j"] = c.j;
    constraints.append(entry);
  }
  out["constraints"] = constraints;

  py::list dendrograms;
  for (const auto& trace : result.dendrograms) {
    py::list merges;
    for (const auto& merge : trace.merges) {
      py::dict record;
      record["left"] = merge.left;
      record["right"] = merge.right;
      record["height"] = merge.height;
      merges.append(record);
    }
    dendrograms.append(merges);
  }
  out["dendrograms"] = dendrograms;
  return out;
}

py::dict metrics_to_dict(const SelectorMetrics& metrics) {
  py::dict out;
  out["tm"] = metrics.tm;
  out["cf"] = metrics.cf;
  out["tpr"] = metrics.tpr;
  out["fdr"] = metrics.fdr;
  out["tpr_star"] = metrics.tpr_star;
  out["fdr_star"] = metrics.fdr_star;
  out["msep_mean"] = metrics.msep_mean;
  out["msep_sd"] = metrics.msep_sd;
  out["md_mean"] = metrics.md_mean;
  out["md_sd"] = metrics.md_sd;
  out["failures"] = metrics.failures;
  out["reps"] = metrics.reps;
  return out;
}

Family family_from_string(const std::string& name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "binomial") return Family::Binomial;
  throw ValidationError("unknown family '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Simultaneous deletion of continuous regressors and merging of factor "
      "levels in (generalized) linear models";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_ArithmeticError);

  m.def(
      "select",
      [](const Matrix& continuous, const std::vector<std::vector<int>>& factors,
         const std::vector<int>& level_counts, const Vector& y,
         const std::string& family, std::optional<double> penalty,
         double linkage) {
        const auto design = design_from_args(continuous, factors, level_counts);
        DmrConfig config;
        config.linkage = linkage;
        config.penalty = penalty;
        const Family fam = family_from_string(family);
        const SelectionResult result =
            fam == Family::Binomial ? dmr_glm(design, y, fam, config)
                                    : dmr::dmr(design, y, config);
        return result_to_dict(result, design.shape);
      },
      py::arg("continuous"), py::arg("factors"), py::arg("level_counts"),
      py::arg("y"), py::arg("family") = "gaussian",
      py::arg("penalty") = py::none(), py::arg("linkage") = 0.0,
      "Run the selection algorithm.  `continuous` is an n x p0 array (p0 may "
      "be 0), `factors` a list of length-n 1-based level code vectors, "
      "`level_counts` the number of levels per factor.  The default penalty "
      "log(n) is the BIC.");

  m.def(
      "generate_experiment",
      [](int id, int c, std::uint64_t seed) {
        const auto spec = ExperimentSpec::make(id, c);
        const auto data = generate_experiment(spec, seed);
        py::dict out;
        const int n = spec.n;
        out["n"] = n;
        out["family"] =
            spec.family == Family::Binomial ? "binomial" : "gaussian";
        out["continuous"] = Matrix(
            data.design.values.block(0, 1, n, spec.shape.p0));
        std::vector<std::vector<int>> factors;
        for (int k = 1; k <= spec.shape.n_factors(); ++k) {
          std::vector<int> codes(n, 1);
          for (int level = 2; level <= spec.shape.level_counts[k - 1]; ++level)
            for (int i = 0; i < n; ++i)
              if (data.design.values(i, spec.shape.column_of(k, level)) == 1.0)
                codes[i] = level;
          factors.push_back(std::move(codes));
        }
        out["factors"] = factors;
        out["level_counts"] = spec.shape.level_counts;
        out["y"] = data.y;
        out["y_new"] = data.y_new;
        out["true_model"] = model_to_dict(spec.true_model);
        out["beta_star"] = spec.beta_star;
        return out;
      },
      py::arg("id"), py::arg("c"), py::arg("seed"),
      "Generate one replication of synthetic experiment 1, 2 or 3.");

  m.def(
      "run_experiment",
      [](int id, int c, int reps, std::uint64_t seed) {
        const auto spec = ExperimentSpec::make(id, c);
        const Selector selector =
            spec.family == Family::Binomial
                ? Selector([](const DesignMatrix& d, const Vector& y) {
                    return dmr_glm(d, y, Family::Binomial);
                  })
                : Selector([](const DesignMatrix& d, const Vector& y) {
                    return dmr::dmr(d, y);
                  });
        return metrics_to_dict(run_monte_carlo(spec, selector, reps, seed));
      },
      py::arg("id"), py::arg("c"), py::arg("reps"), py::arg("seed"),
      "Monte Carlo benchmark; returns the aggregated metrics.");

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
