#pragma once

#include "deconvkit/density_estimation.hpp"
#include "deconvkit/distributions.hpp"
#include "deconvkit/fourier.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace deconvkit {

struct NpfdConfig
{
  std::optional<double> epsilon; ///< unset: 0.001, or max(0.1, n_x^-1/2) for small samples
  std::optional<double> delta;   ///< unset: two grid spacings
  int n_max = 100;
  std::size_t ell = 100;
  std::size_t K = 401;
  double t_max = 32.0;
  int max_doublings = 3;
  int df = 5;
  std::optional<int> df_x; ///< spline df used for the X sample only
  KnotAnchor anchor = KnotAnchor::Mode;
  bool use_empirical_ft = false;
  bool clip_negative = false;
  bool rescale_at_zero = true;
  std::size_t n_y = 512;
  std::optional<int> force_n; ///< skip the search and use this power
  InversionNorm norm = InversionNorm::Standard;

  void validate() const;
};

/// Sample sizes at or below this use empirical transforms.
constexpr std::size_t small_sample_limit = 200;

double resolve_epsilon(const NpfdConfig& config, std::size_t n_x, std::size_t n_z);
bool uses_empirical_ft(const NpfdConfig& config, std::size_t n_x, std::size_t n_z);

struct TransformConstants
{
  double a = 1.0;
  double b_x = 0.0;
  double b_z = 0.0;
  double b_y = 0.0;
};

struct TransformedSamples
{
  Sample x;
  Sample z;
  TransformConstants constants;
};

TransformedSamples transform_inputs(const Sample& x, const Sample& z, int N);

/// Throws VarianceOrderError unless Var(z) > Var(x).
void check_variance_order(const Sample& x, const Sample& z);

/// A characteristic-function estimate that can be evaluated anywhere.
struct FourierSource
{
  std::function<cplx(double)> at;

  FourierEstimate on(const TGrid& grid) const;
};

struct FourierSourcePair
{
  FourierSource x;
  FourierSource z;
  bool empirical = false;
};

/// Build the transform estimates for already transformed samples: empirical
/// transforms for small samples (or when requested), otherwise Poisson-spline
/// fits on the shared range evaluated by the Monte Carlo sum.
FourierSourcePair make_ft_sources(const Sample& x_t, const Sample& z_t, const NpfdConfig& config);

std::pair<FourierEstimate, FourierEstimate>
estimate_ft_pair(const Sample& x_t, const Sample& z_t, const NpfdConfig& config, const TGrid& grid);

struct PowerSelection
{
  int N = 1;
  double gamma = 0.0;
  std::size_t R = 0;
  double t_max = 0.0; ///< upper bound of the scan grid that produced gamma
  int doublings = 0;
  bool hit_n_max = false;
  double delta = 0.0;
  FourierSourcePair sources; ///< estimates for the chosen power
};

/// Provides the (X, Z) transform estimates for a candidate power N.
using SourceFactory = std::function<FourierSourcePair(int N)>;

/// Power search over N = 1..n_max (or the forced power).
PowerSelection select_power(const SourceFactory& factory, double epsilon, const NpfdConfig& config);

PowerSelection select_power(const Sample& x, const Sample& z, const NpfdConfig& config);

/// (phi_z / phi_x)^N on the grid, rescaled so that the value at t = 0 is 1
/// when requested. `raw_at_zero` receives the powered quotient at 0 before
/// rescaling.
FourierEstimate powered_quotient(const FourierEstimate& phi_x,
                                 const FourierEstimate& phi_z,
                                 int N,
                                 bool rescale,
                                 cplx* raw_at_zero = nullptr);

struct NpfdDiagnostics
{
  cplx phi_at_zero{ 1.0, 0.0 }; ///< powered quotient at 0 before rescaling
  double max_imaginary = 0.0;
  bool hit_n_max = false;
  bool empirical_ft = false;
  double epsilon = 0.0;
  double delta = 0.0;
  double scan_t_max = 0.0;
  int doublings = 0;
  std::vector<std::string> warnings;
};

struct NpfdResult
{
  int N = 1;
  double gamma = 0.0;
  std::size_t R = 0;
  TransformConstants constants;
  std::vector<double> ygrid;
  std::vector<double> density;
  /// The powered quotient on the final inversion grid spanning [-gamma, gamma].
  std::optional<FourierEstimate> quotient;
  NpfdDiagnostics diagnostics;
};

NpfdResult npfd_deconvolve(const Sample& x, const Sample& z, const NpfdConfig& config = {});

/// Error distribution known: its transform replaces the X estimate.
NpfdResult npfd_known_error(const Sample& z, const DistributionSpec& error, const NpfdConfig& config = {});

/// x_j = (z_j1 - z_j2) / sqrt(2).
Sample replicates_to_error_sample(const std::vector<double>& z1, const std::vector<double>& z2);

/// Replicated measurements: the scaled differences stand in for the error
/// sample and both columns together form the contaminated sample.
NpfdResult npfd_replicates(const ReplicateSample& replicates, const NpfdConfig& config = {});

} // namespace deconvkit
