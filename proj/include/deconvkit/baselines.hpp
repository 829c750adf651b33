#pragma once

#include "deconvkit/distributions.hpp"
#include "deconvkit/fourier.hpp"

#include <optional>
#include <string>
#include <vector>

namespace deconvkit {

enum class BaselineMethod
{
  FDD,
  MCD,
  DKM,
  RMD
};

std::string method_name(BaselineMethod m);

/// Smoothing kernels, described by their Fourier transforms on [-1, 1].
enum class SmoothingKernel
{
  SincTruncated, ///< phi_K(t) = 1
  QuarticFT      ///< phi_K(t) = (1 - t^2)^3
};

double kernel_ft(SmoothingKernel kernel, double t);

struct BaselineConfig
{
  BaselineMethod method = BaselineMethod::FDD;
  std::optional<double> bandwidth;
  std::optional<SmoothingKernel> kernel;
  std::optional<double> damping; ///< FDD cut-off M
  double ridge = 0.0;            ///< RMD ridge rho
  std::optional<DistributionSpec> error;
  std::size_t K = 801; ///< frequency points used for the inversion integral

  void validate() const;
};

struct BaselineResult
{
  std::vector<double> density;
  double bandwidth = 0.0; ///< h, or the damping cut-off M for FDD
  double t_limit = 0.0;   ///< half-width of the frequency window integrated
  std::vector<std::string> warnings;
};

/// Bartlett damping 1 - |t| / M on [-M, M], zero outside.
double bartlett_damping(double t, double M);

/// Damping cut-off M = p / sqrt(2), p from a least-squares fit of
/// log|phi_x| against log t where |phi_x| lies in [n^-1/2, 0.5].
double fdd_damping_cutoff(const Sample& x);

BaselineResult fdd_deconvolve(const Sample& x,
                              const Sample& z,
                              const std::vector<double>& ygrid,
                              const BaselineConfig& config = { BaselineMethod::FDD });

/// Default MCD bandwidth 1 / t_c, t_c the first t with |phi_z| < n_z^-1/2.
double mcd_default_bandwidth(const Sample& z);

BaselineResult mcd_deconvolve(const Sample& x,
                              const Sample& z,
                              const std::vector<double>& ygrid,
                              const BaselineConfig& config = { BaselineMethod::MCD });

/// Silverman's normal-reference bandwidth of z, inflated by the share of the
/// error variance in Var(z): 1.06 s_z n^-1/5 (1 + var_x / s_z^2).
double rule_of_thumb_bandwidth(const Sample& z, double error_variance);

BaselineResult dkm_deconvolve(const Sample& z,
                              const DistributionSpec& error,
                              const std::vector<double>& ygrid,
                              const BaselineConfig& config = { BaselineMethod::DKM });

/// sqrt|mean_j cos(t (z_j1 - z_j2))|.
double rmd_error_ft(const ReplicateSample& replicates, double t);

BaselineResult rmd_deconvolve(const ReplicateSample& replicates,
                              const std::vector<double>& ygrid,
                              const BaselineConfig& config = { BaselineMethod::RMD });

} // namespace deconvkit
