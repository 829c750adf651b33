#pragma once

#include "deconvkit/density_estimation.hpp"
#include "deconvkit/distributions.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace deconvkit {

using cplx = std::complex<double>;

/// Symmetric, equidistant, odd-length grid t_k = (k - c) * h, c the centre.
class TGrid
{
public:
  TGrid(std::size_t K, double t_max);

  std::size_t size() const noexcept { return t_.size(); }
  std::size_t center() const noexcept { return (t_.size() - 1) / 2; }
  double t_max() const noexcept { return t_max_; }
  double spacing() const noexcept { return h_; }
  double operator[](std::size_t k) const { return t_[k]; }
  const std::vector<double>& values() const noexcept { return t_; }

private:
  std::vector<double> t_;
  double t_max_;
  double h_;
};

struct FourierEstimate
{
  TGrid grid;
  std::vector<cplx> values;

  FourierEstimate(TGrid g, std::vector<cplx> v);

  std::size_t size() const noexcept { return values.size(); }
  cplx at_zero() const { return values[grid.center()]; }
  /// Largest |value(-t) - conj(value(t))| over the grid.
  double conjugate_asymmetry() const;
  /// "t,re,im" rows with a header line.
  std::string to_csv() const;
};

/// Riemann-type transform ((v - u) / ell) * sum_j f(s_j) e^{i s_j t} over ell
/// equidistant points s_j that include both ends of [u, v].
FourierEstimate mc_fourier(const std::function<double(double)>& density,
                           double u,
                           double v,
                           std::size_t ell,
                           const TGrid& grid);

FourierEstimate mc_fourier(const DensityFit& fit, double u, double v, std::size_t ell, const TGrid& grid);

/// Same sum at a single frequency.
cplx mc_fourier_at(const std::vector<double>& s, const std::vector<double>& weights, double t);

/// Tabulate the density once, returning (s_j, ((v - u) / ell) * f(s_j)).
std::pair<std::vector<double>, std::vector<double>>
mc_nodes(const std::function<double(double)>& density, double u, double v, std::size_t ell);

FourierEstimate empirical_ft(const Sample& sample, const TGrid& grid);
cplx empirical_ft_at(const Sample& sample, double t);

enum class InversionNorm
{
  /// (1 / pi) * gamma / (K + 2), K the number of points of the estimate.
  Standard,
  /// (1 / pi) * gamma / (2R + 1), the width of one grid cell over 2 pi.
  Riemann
};

struct InversionResult
{
  std::vector<double> density;
  double max_imaginary = 0.0;
};

/// Inverse transform of the estimate restricted to indices centre-R..centre+R.
InversionResult mc_inverse(const FourierEstimate& estimate,
                           std::size_t R,
                           const std::vector<double>& ygrid,
                           InversionNorm norm = InversionNorm::Standard);

/// n equidistant points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

} // namespace deconvkit
