#pragma once

#include "deconvkit/baselines.hpp"
#include "deconvkit/density_estimation.hpp"
#include "deconvkit/distributions.hpp"
#include "deconvkit/npfd.hpp"
#include "deconvkit/simbench.hpp"

#include <json.hpp>

#include <istream>
#include <string>
#include <vector>

namespace deconvkit {

using json = nlohmann::json;

/// {"family": "Gamma", "params": {"shape": 4, "rate": 1}}; Mixture and
/// Convolution carry {"weights": [...], "components": [...]} in params.
json distribution_to_json(const DistributionSpec& spec);
DistributionSpec distribution_from_json(const json& j);

/// Parses a JSON document, raising ParseError on syntax errors.
json parse_json(const std::string& text);

json npfd_config_to_json(const NpfdConfig& config);
/// Applies the keys present in `j` on top of `config`.
void apply_npfd_config(const json& j, NpfdConfig& config);

json npfd_result_to_json(const NpfdResult& result);
json baseline_result_to_json(BaselineMethod method,
                             const std::vector<double>& ygrid,
                             const BaselineResult& result);
json density_fit_to_json(const DensityFit& fit);

json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const json& j);

json summary_to_json(const SummaryTable& table);
/// method,median,q1,q3,failures
std::string summary_to_csv(const SummaryTable& table);
/// One row per replicate: replicate,seed,attempts,N,<method columns>.
std::string replicates_to_csv(const SummaryTable& table);
/// y,truth,NPFD[,baseline]
std::string curves_to_csv(const ReplicateCurves& curves, const std::string& baseline_name);
/// y,fhat
std::string density_to_csv(const std::vector<double>& ygrid, const std::vector<double>& density);

/// Numeric CSV with a header row. Columns may be of different lengths, but
/// only by ending early: once a cell of a column is empty, every later cell
/// of that column must be empty too.
struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  /// Throws ParseError when the column is missing.
  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Decimal text with 12 significant digits, used by every CSV writer.
std::string format_number(double v);

} // namespace deconvkit
