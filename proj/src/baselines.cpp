#include "deconvkit/baselines.hpp"
#include "deconvkit/errors.hpp"
#include "deconvkit/npfd.hpp"

#include <algorithm>
#include <cmath>

namespace deconvkit {

std::string method_name(BaselineMethod m)
{
  switch (m) {
    case BaselineMethod::FDD: return "FDD";
    case BaselineMethod::MCD: return "MCD";
    case BaselineMethod::DKM: return "DKM";
    case BaselineMethod::RMD: return "RMD";
  }
  return "unknown";
}

double kernel_ft(SmoothingKernel kernel, double t)
{
  if (std::abs(t) > 1.0)
    return 0.0;
  if (kernel == SmoothingKernel::SincTruncated)
    return 1.0;
  const double u = 1.0 - t * t;
  return u * u * u;
}

void BaselineConfig::validate() const
{
  if (bandwidth && !(*bandwidth > 0.0))
    throw ParameterError("bandwidth must be positive");
  if (damping && !(*damping > 0.0))
    throw ParameterError("damping cut-off must be positive");
  if (!(ridge >= 0.0))
    throw ParameterError("ridge must be nonnegative");
  if (K < 3 || K % 2 == 0)
    throw ParameterError("K must be odd and >= 3");
  if (method == BaselineMethod::DKM && !error)
    throw ParameterError("DKM needs the error distribution");
}

namespace {

// (1 / 2 pi) * int_{-T}^{T} g(t) e^{-ity} dt by the Riemann sum on K points.
template<class Integrand>
std::vector<double> invert(Integrand g, double T, std::size_t K, const std::vector<double>& ygrid)
{
  const TGrid grid(K, T);
  FourierSource src{ g };
  FourierEstimate est = src.on(grid);
  return mc_inverse(est, grid.center(), ygrid, InversionNorm::Riemann).density;
}

void require_finite(const std::vector<double>& v, const std::string& method)
{
  for (double d : v)
    if (!std::isfinite(d))
      throw FitFailureError(method + " produced non-finite density values", {});
}

} // namespace

double bartlett_damping(double t, double M)
{
  const double a = std::abs(t);
  return a >= M ? 0.0 : 1.0 - a / M;
}

double fdd_damping_cutoff(const Sample& x)
{
  const double n = static_cast<double>(x.size());
  const double floor = 1.0 / std::sqrt(n);
  const double sd = std::sqrt(x.variance());
  if (!(sd > 0.0))
    throw DampingFitError("convolving sample has zero spread");

  // Walk outwards until the transform first drops under the noise floor.
  const double step = 0.01 / sd;
  std::vector<double> lt, lphi;
  for (double t = step; t <= 200.0 / sd; t += step) {
    const double m = std::abs(empirical_ft_at(x, t));
    if (m < floor)
      break;
    if (m <= 0.5) {
      lt.push_back(std::log(t));
      lphi.push_back(std::log(m));
    }
  }
  if (lt.size() < 2)
    throw DampingFitError("no region with |phi_x| in [n^-1/2, 0.5] to fit the damping cut-off");

  const double k = static_cast<double>(lt.size());
  double mt = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    mt += lt[i];
    mp += lphi[i];
  }
  mt /= k;
  mp /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    sxy += (lt[i] - mt) * (lphi[i] - mp);
    sxx += (lt[i] - mt) * (lt[i] - mt);
  }
  if (!(sxx > 0.0))
    throw DampingFitError("degenerate damping fit region");
  const double p = std::abs(sxy / sxx);
  return p / std::sqrt(2.0);
}

BaselineResult fdd_deconvolve(const Sample& x,
                              const Sample& z,
                              const std::vector<double>& ygrid,
                              const BaselineConfig& config)
{
  config.validate();
  BaselineResult res;
  const double M = config.damping ? *config.damping : fdd_damping_cutoff(x);
  res.bandwidth = M;
  res.t_limit = M;
  if (M < 1e-8) {
    res.density.assign(ygrid.size(), 0.0);
    res.warnings.push_back("damping cut-off is numerically zero");
    return res;
  }
  res.density = invert(
    [&](double t) {
      return bartlett_damping(t, M) * empirical_ft_at(z, t) / empirical_ft_at(x, t);
    },
    M,
    config.K,
    ygrid);
  require_finite(res.density, "FDD");
  return res;
}

double mcd_default_bandwidth(const Sample& z)
{
  const double floor = 1.0 / std::sqrt(static_cast<double>(z.size()));
  const double sd = std::sqrt(z.variance());
  if (!(sd > 0.0))
    throw InsufficientDataError("mixed sample has zero spread");
  const double step = 0.005 / sd;
  for (double t = step; t <= 500.0 / sd; t += step)
    if (std::abs(empirical_ft_at(z, t)) < floor)
      return 1.0 / t;
  return sd / 500.0;
}

BaselineResult mcd_deconvolve(const Sample& x,
                              const Sample& z,
                              const std::vector<double>& ygrid,
                              const BaselineConfig& config)
{
  config.validate();
  BaselineResult res;
  const double h = config.bandwidth ? *config.bandwidth : mcd_default_bandwidth(z);
  const SmoothingKernel kernel = config.kernel.value_or(SmoothingKernel::QuarticFT);
  const double floor = 1.0 / std::sqrt(static_cast<double>(x.size()));
  res.bandwidth = h;
  res.t_limit = 1.0 / h;
  res.density = invert(
    [&](double t) -> cplx {
      const cplx px = empirical_ft_at(x, t);
      if (std::abs(px) < floor)
        return 0.0;
      return kernel_ft(kernel, t * h) * empirical_ft_at(z, t) / px;
    },
    1.0 / h,
    config.K,
    ygrid);
  require_finite(res.density, "MCD");
  return res;
}

double rule_of_thumb_bandwidth(const Sample& z, double error_variance)
{
  const double var_z = z.variance();
  if (!(var_z > 0.0))
    throw InsufficientDataError("contaminated sample has zero spread");
  const double share = std::clamp(error_variance / var_z, 0.0, 1.0);
  const double silverman = 1.06 * std::sqrt(var_z) * std::pow(static_cast<double>(z.size()), -0.2);
  return silverman * (1.0 + share);
}

BaselineResult dkm_deconvolve(const Sample& z,
                              const DistributionSpec& error,
                              const std::vector<double>& ygrid,
                              const BaselineConfig& config)
{
  BaselineConfig cfg = config;
  cfg.method = BaselineMethod::DKM;
  if (!cfg.error)
    cfg.error = error;
  cfg.validate();

  SmoothingKernel default_kernel;
  if (error.family == Family::Normal)
    default_kernel = SmoothingKernel::SincTruncated;
  else if (error.family == Family::Laplace)
    default_kernel = SmoothingKernel::QuarticFT;
  else
    throw UnsupportedFamilyError("DKM supports Normal or Laplace errors, got " + family_name(error.family));
  const SmoothingKernel kernel = cfg.kernel.value_or(default_kernel);

  BaselineResult res;
  double h;
  if (cfg.bandwidth) {
    h = *cfg.bandwidth;
  } else {
    h = rule_of_thumb_bandwidth(z, variance(error));
  }
  res.bandwidth = h;
  res.t_limit = 1.0 / h;
  res.density = invert(
    [&](double t) { return kernel_ft(kernel, t * h) * empirical_ft_at(z, t) / cf(error, t); },
    1.0 / h,
    cfg.K,
    ygrid);
  require_finite(res.density, "DKM");
  return res;
}

double rmd_error_ft(const ReplicateSample& replicates, double t)
{
  const auto& a = replicates.first().values();
  const auto& b = replicates.second().values();
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    s += std::cos(t * (a[j] - b[j]));
  return std::sqrt(std::abs(s / static_cast<double>(a.size())));
}

BaselineResult rmd_deconvolve(const ReplicateSample& replicates,
                              const std::vector<double>& ygrid,
                              const BaselineConfig& config)
{
  config.validate();
  if (replicates.size() < 20)
    throw InsufficientDataError("RMD needs at least 20 replicate pairs");
  const SmoothingKernel kernel = config.kernel.value_or(SmoothingKernel::QuarticFT);
  const Sample pooled = replicates.pooled();

  BaselineResult res;
  double h;
  if (config.bandwidth) {
    h = *config.bandwidth;
  } else {
    const Sample diffs = replicates_to_error_sample(replicates.first().values(),
                                                    replicates.second().values());
    double var_x = 0.0;
    for (double d : diffs)
      var_x += d * d;
    var_x /= static_cast<double>(diffs.size());
    h = rule_of_thumb_bandwidth(pooled, var_x);
  }
  const double rho = config.ridge;
  res.bandwidth = h;
  res.t_limit = 1.0 / h;
  res.density = invert(
    [&](double t) {
      return kernel_ft(kernel, t * h) * empirical_ft_at(pooled, t) / (rmd_error_ft(replicates, t) + rho);
    },
    1.0 / h,
    config.K,
    ygrid);
  require_finite(res.density, "RMD");
  return res;
}

} // namespace deconvkit
