#pragma once

#include "deconvkit/distributions.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace deconvkit {

struct Histogram
{
  std::vector<double> boundaries; ///< n_I + 1 equally spaced edges
  std::vector<double> midpoints;
  std::vector<double> counts;     ///< integer-valued, stored as double for the GLM
  double width = 0.0;

  std::size_t bins() const noexcept { return midpoints.size(); }
  double total() const;
};

enum class KnotAnchor
{
  Mode,
  Median
};

/// Number of histogram bins from the one-stage plug-in bin width
/// (Scott's rule when the functional estimate is not negative).
std::size_t select_bin_count(const Sample& sample);

/// Plug-in bin width itself, exposed for testing.
double wand_bin_width(const std::vector<double>& x);

/// Equal-width bins over [min, max]; intervals are (b_i, b_{i+1}] except the
/// first, which also holds the minimum.
Histogram build_histogram(const Sample& sample, std::size_t n_bins);

/// Quantile with linear interpolation between order statistics (R type 7).
double quantile(std::vector<double> sorted_values, double p);

/// Interior knots placed at sample quantiles chosen relative to the histogram
/// mode (or the median). Quantiles beyond the first or last midpoint are
/// pulled back onto it, and consecutive knots must have a midpoint between
/// them; gaps are refilled from the median, then from the quantiles
/// j / (J + 1). Returns J strictly increasing values.
std::vector<double> place_knots(const Histogram& hist,
                                const Sample& sample,
                                int J,
                                KnotAnchor anchor = KnotAnchor::Mode);

/// Natural cubic spline basis (truncated power form) with boundary knots at
/// the ends of [lo, hi]. Columns: intercept, linear term, then one column per
/// interior knot, J + 2 in total.
class NaturalSplineBasis
{
public:
  NaturalSplineBasis() = default;
  NaturalSplineBasis(std::vector<double> interior_knots, double lo, double hi);

  std::size_t size() const noexcept { return interior_.size() + 2; }
  Eigen::VectorXd row(double x) const;
  Eigen::MatrixXd matrix(const std::vector<double>& x) const;

  const std::vector<double>& interior_knots() const noexcept { return interior_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

private:
  std::vector<double> interior_;
  std::vector<double> scaled_; // all knots mapped to [0, 1], boundaries included
  double lo_ = 0.0;
  double hi_ = 1.0;
};

/// Fitted Poisson-spline density. Immutable after construction.
class DensityFit
{
public:
  DensityFit() = default;
  DensityFit(NaturalSplineBasis basis,
             Eigen::VectorXd coefficients,
             double normalizer,
             double deviance,
             int iterations);

  double operator()(double x) const;

  const std::vector<double>& knots() const noexcept { return basis_.interior_knots(); }
  const Eigen::VectorXd& coefficients() const noexcept { return beta_; }
  double lo() const noexcept { return basis_.lo(); }
  double hi() const noexcept { return basis_.hi(); }
  double normalizer() const noexcept { return normalizer_; }
  int degrees_of_freedom() const noexcept { return static_cast<int>(knots().size()) + 1; }
  double deviance() const noexcept { return deviance_; }
  int iterations() const noexcept { return iterations_; }

private:
  NaturalSplineBasis basis_;
  Eigen::VectorXd beta_;
  double normalizer_ = 1.0;
  double deviance_ = 0.0;
  int iterations_ = 0;
};

/// Poisson regression of the bin counts on the spline basis at the
/// midpoints, by iteratively reweighted least squares.
DensityFit fit_poisson_spline(const Histogram& hist, const std::vector<double>& knots);

double eval_density(const DensityFit& fit, double x);

/// Poisson deviance of the histogram counts against the fitted counts.
double poisson_deviance(const Histogram& hist, const DensityFit& fit);

struct DensityOptions
{
  int df = 5;
  KnotAnchor anchor = KnotAnchor::Mode;
  std::optional<std::size_t> bins; ///< skip bin-count selection when set
};

/// Bin-count selection, histogram, knots and fit in one call.
DensityFit estimate_density(const Sample& sample, const DensityOptions& options = {});

} // namespace deconvkit
