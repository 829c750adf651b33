#pragma once

#include "deconvkit/baselines.hpp"
#include "deconvkit/distributions.hpp"
#include "deconvkit/npfd.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace deconvkit {

/// How a replicate's data are generated and which NPFD variant consumes them.
enum class ScenarioKind
{
  SampledConvolving, ///< x ~ f_X and z ~ f_X * f_Y, independent samples
  KnownError,        ///< z ~ f_X * f_Y with f_X known exactly
  Replicated         ///< two measurements y_j + e_j1, y_j + e_j2 per subject
};

std::string kind_name(ScenarioKind k);
ScenarioKind kind_from_name(const std::string& name);

struct ScenarioSpec
{
  std::string id;
  std::string description;
  ScenarioKind kind = ScenarioKind::SampledConvolving;
  DistributionSpec target;
  DistributionSpec convolving;
  /// Per-subject error standard deviation multipliers for heteroscedastic
  /// replicated scenarios. Empty means homoscedastic. Its length must equal n_z.
  std::vector<double> error_scales;
  std::size_t n_x = 500;
  std::size_t n_z = 500; ///< number of subjects for replicated scenarios
  NpfdConfig npfd;
  std::optional<BaselineMethod> baseline;
  BaselineConfig baseline_config;
  std::size_t replicates = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Returns every built-in scenario.
const std::vector<ScenarioSpec>& builtin_scenarios();

/// Throws ParameterError for an unknown id.
const ScenarioSpec& find_scenario(const std::string& id);

/// Trapezoid integral of (fhat - f_Y)^2 over an equidistant grid.
double ise(const std::vector<double>& ygrid, const std::vector<double>& fhat, const DistributionSpec& truth);

/// Seed of replicate r: a splitmix64 mix of the base seed and r.
std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t r);

/// The data drawn for one replicate.
struct ReplicateData
{
  std::optional<Sample> x;
  std::optional<Sample> z;
  std::optional<ReplicateSample> pairs;
  std::size_t attempts = 1;
};

/// Draws replicate r, redrawing while the variance order fails.
ReplicateData draw_replicate(const ScenarioSpec& spec, std::size_t r);

struct ReplicateOutcome
{
  std::uint64_t seed = 0;
  std::size_t attempts = 1;
  int N = 0;
  double npfd = 0.0;     ///< 10 x ISE, NaN when the run failed
  double baseline = 0.0; ///< 10 x ISE, NaN when absent or failed
  std::string error;
};

/// Densities of one replicate on the NPFD y-grid.
struct ReplicateCurves
{
  std::vector<double> ygrid;
  std::vector<double> truth;
  std::vector<double> npfd;
  std::vector<double> baseline;
  int N = 0;
};

ReplicateCurves run_replicate(const ScenarioSpec& spec, std::size_t r, ReplicateOutcome* outcome = nullptr);

struct Quartiles
{
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Median of the whole sample; q1 and q3 are the medians of the lower and
/// upper halves (the middle element is left out of both when the count is odd).
Quartiles quartiles(std::vector<double> values);

struct BoxData
{
  double lower_whisker = 0.0;
  double upper_whisker = 0.0;
  Quartiles box;
  std::vector<double> outliers;
};

/// Tukey box-plot data with the 1.5 IQR fence.
BoxData box_data(const std::vector<double>& values);

struct MethodSummary
{
  std::string method;
  Quartiles stats;
  std::vector<double> values; ///< raw 10 x ISE per replicate, NaN for failures
  std::size_t failures = 0;
  BoxData box;
};

struct SummaryTable
{
  std::string scenario;
  std::size_t replicates = 0;
  std::vector<MethodSummary> methods;
  std::size_t representative = 0;
  std::vector<int> N;
  std::size_t redraws = 0;
  std::vector<ReplicateOutcome> outcomes;
};

struct ScenarioRun
{
  SummaryTable table;
  ReplicateCurves representative;
};

/// Runs every replicate on `threads` workers. The result does not depend on
/// the thread count.
ScenarioRun run_scenario(const ScenarioSpec& spec, unsigned threads = 1);

} // namespace deconvkit
