#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmrselect/evaluation.hpp"
#include "dmrselect/io.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

dmr::Schema parse_schema(const std::string& response,
                         const std::vector<std::string>& factor_flags) {
  dmr::Schema schema;
  schema.response = response;
  for (const auto& flag : factor_flags) {
    const auto eq = flag.find('=');
    std::string name = flag.substr(0, eq);
    std::vector<std::string> levels;
    if (eq != std::string::npos) {
      std::string rest = flag.substr(eq + 1);
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        const auto comma = rest.find(',', pos);
        if (comma == std::string::npos) {
          levels.push_back(rest.substr(pos));
          break;
        }
        levels.push_back(rest.substr(pos, comma - pos));
        pos = comma + 1;
      }
    }
    schema.factors.emplace_back(std::move(name), std::move(levels));
  }
  return schema;
}

int run_select(const std::string& input, const dmr::Schema& schema,
               const std::string& family_name, const std::string& penalty,
               double linkage, const std::string& format) {
  dmr::Family family = dmr::Family::Gaussian;
  if (family_name == "binomial") {
    family = dmr::Family::Binomial;
  } else if (family_name != "gaussian") {
    std::cerr << "error: unknown family '" << family_name << "'\n";
    return kExitValidation;
  }
  if (linkage < 0.0 || linkage > 1.0) {
    std::cerr << "error: linkage must lie in [0, 1]\n";
    return kExitValidation;
  }

  dmr::DmrConfig config;
  config.linkage = linkage;
  if (penalty != "bic") {
    try {
      const double r_n = std::stod(penalty);
      if (!(r_n > 0.0)) throw std::invalid_argument("penalty");
      config.penalty = r_n;
    } catch (const std::exception&) {
      std::cerr << "error: penalty must be 'bic' or a positive number, got '"
                << penalty << "'\n";
      return kExitValidation;
    }
  }

  std::ifstream file(input);
  if (!file) {
    std::cerr << "error: cannot open '" << input << "'\n";
    return kExitValidation;
  }

  try {
    const dmr::DataTable table = dmr::read_csv(file);
    const auto specs = dmr::resolve_schema(table, schema);
    const auto [design, y] = dmr::build_design_matrix(table, specs);

    dmr::SelectionResult result =
        family == dmr::Family::Binomial
            ? dmr::dmr_glm(design, y, family, config)
            : dmr::dmr(design, y, config);

    if (format == "csv") {
      std::cout << dmr::path_csv(design, result);
    } else {
      std::cout << dmr::selection_report(design, result, family).dump(2)
                << '\n';
    }
    return 0;
  } catch (const dmr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const dmr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

int run_simulate(int experiment, int c, int reps, std::uint64_t seed) {
  try {
    const auto spec = dmr::ExperimentSpec::make(experiment, c);
    const std::string name = spec.family == dmr::Family::Binomial
                                 ? "dmr_glm"
                                 : "dmr";
    const dmr::Selector selector =
        spec.family == dmr::Family::Binomial
            ? dmr::Selector([](const dmr::DesignMatrix& design,
                               const dmr::Vector& y) {
                return dmr::dmr_glm(design, y, dmr::Family::Binomial);
              })
            : dmr::Selector([](const dmr::DesignMatrix& design,
                               const dmr::Vector& y) {
                return dmr::dmr(design, y);
              });
    const auto metrics = dmr::run_monte_carlo(spec, selector, reps, seed);
    std::cout << dmr::metrics_csv_header() << '\n'
              << dmr::metrics_csv_row(spec, name, metrics) << '\n';
    return 0;
  } catch (const dmr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const dmr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Model selection by simultaneous deletion of continuous regressors and "
      "merging of factor levels, over a t-statistic-ordered nested path "
      "scored by generalized information criterion"};
  app.require_subcommand(1);

  // select
  auto* select = app.add_subcommand(
      "select", "Select a model for CSV data and print a report");
  std::string input, response, family = "gaussian", penalty = "bic",
              format = "json";
  std::vector<std::string> factor_flags;
  double linkage = 0.0;
  select->add_option("-i,--input", input, "Input CSV file (header row)")
      ->required();
  select->add_option("-y,--response", response, "Response column name")
      ->required();
  select
      ->add_option("-f,--factor", factor_flags,
                   "Factor column, optionally with ordered levels: "
                   "NAME or NAME=lvl1,lvl2,... (first level = reference). "
                   "Undeclared non-response columns are continuous.")
      ->take_all();
  select->add_option("--family", family, "gaussian or binomial");
  select->add_option("--penalty", penalty,
                     "'bic' (log n) or a positive number r_n");
  select->add_option("--linkage", linkage,
                     "Linkage parameter b in [0,1]; 0 = complete");
  select->add_option("--format", format, "json (report) or csv (path table)");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Run a Monte Carlo benchmark and print metrics CSV");
  int experiment = 1, c = 1, reps = 100;
  std::uint64_t seed = 0;
  simulate->add_option("-e,--experiment", experiment, "Experiment id: 1, 2, 3")
      ->required();
  simulate->add_option("-c,--c", c, "Replication multiplier (sets n)");
  simulate->add_option("-r,--reps", reps, "Monte Carlo replications");
  simulate->add_option("-s,--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (select->parsed())
    return run_select(input, parse_schema(response, factor_flags), family,
                      penalty, linkage, format);
  if (c < 1 || reps < 1) {
    std::cerr << "error: --c and --reps must be positive\n";
    return kExitValidation;
  }
  return run_simulate(experiment, c, reps, seed);
}
