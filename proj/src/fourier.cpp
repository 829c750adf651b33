#include "deconvkit/fourier.hpp"
#include "deconvkit/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace deconvkit {

TGrid::TGrid(std::size_t K, double t_max)
  : t_max_(t_max)
{
  if (K < 3 || K % 2 == 0)
    throw GridError("t-grid size must be odd and >= 3, got " + std::to_string(K));
  if (!(t_max > 0.0) || !std::isfinite(t_max))
    throw GridError("t-grid upper bound must be positive");
  const std::size_t c = (K - 1) / 2;
  h_ = t_max / static_cast<double>(c);
  t_.resize(K);
  for (std::size_t m = 0; m <= c; ++m) {
    double t = static_cast<double>(m) * h_;
    t_[c + m] = t;
    t_[c - m] = -t;
  }
  t_.back() = t_max;
  t_.front() = -t_max;
}

FourierEstimate::FourierEstimate(TGrid g, std::vector<cplx> v)
  : grid(std::move(g))
  , values(std::move(v))
{
  if (values.size() != grid.size())
    throw LengthMismatchError("Fourier values do not match the grid size");
}

double FourierEstimate::conjugate_asymmetry() const
{
  const std::size_t K = values.size();
  double worst = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    worst = std::max(worst, std::abs(values[K - 1 - k] - std::conj(values[k])));
  return worst;
}

std::string FourierEstimate::to_csv() const
{
  std::ostringstream os;
  os.precision(17);
  os << "t,re,im\n";
  for (std::size_t k = 0; k < values.size(); ++k)
    os << grid[k] << ',' << values[k].real() << ',' << values[k].imag() << '\n';
  return os.str();
}

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
  if (n == 0)
    return {};
  if (n == 1)
    return { lo };
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + static_cast<double>(i) * step;
  out.back() = hi;
  return out;
}

std::pair<std::vector<double>, std::vector<double>>
mc_nodes(const std::function<double(double)>& density, double u, double v, std::size_t ell)
{
  if (ell < 10)
    throw ParameterError("Monte Carlo transform needs at least 10 points");
  if (!(u < v))
    throw ParameterError("Monte Carlo interval must satisfy u < v");
  auto s = linspace(u, v, ell);
  std::vector<double> w(ell);
  const double scale = (v - u) / static_cast<double>(ell);
  for (std::size_t j = 0; j < ell; ++j)
    w[j] = scale * density(s[j]);
  return { std::move(s), std::move(w) };
}

cplx mc_fourier_at(const std::vector<double>& s, const std::vector<double>& weights, double t)
{
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    re += weights[j] * std::cos(s[j] * t);
    im += weights[j] * std::sin(s[j] * t);
  }
  return { re, im };
}

namespace {

// Evaluate a sum of weighted exponentials on the non-negative half of the grid
// and mirror it, so the result is exactly conjugate symmetric.
template<class Point>
FourierEstimate tabulate(const TGrid& grid, Point point)
{
  const std::size_t K = grid.size();
  const std::size_t c = grid.center();
  std::vector<cplx> values(K);
  for (std::size_t m = 0; m <= c; ++m) {
    cplx v = point(grid[c + m]);
    values[c + m] = v;
    values[c - m] = std::conj(v);
  }
  values[c] = { values[c].real(), 0.0 };
  return FourierEstimate(grid, std::move(values));
}

} // namespace

FourierEstimate mc_fourier(const std::function<double(double)>& density,
                           double u,
                           double v,
                           std::size_t ell,
                           const TGrid& grid)
{
  auto [s, w] = mc_nodes(density, u, v, ell);
  return tabulate(grid, [&](double t) { return mc_fourier_at(s, w, t); });
}

FourierEstimate mc_fourier(const DensityFit& fit, double u, double v, std::size_t ell, const TGrid& grid)
{
  return mc_fourier([&fit](double x) { return fit(x); }, u, v, ell, grid);
}

cplx empirical_ft_at(const Sample& sample, double t)
{
  if (t == 0.0)
    return { 1.0, 0.0 };
  double re = 0.0, im = 0.0;
  for (double z : sample) {
    re += std::cos(t * z);
    im += std::sin(t * z);
  }
  const double n = static_cast<double>(sample.size());
  return { re / n, im / n };
}

FourierEstimate empirical_ft(const Sample& sample, const TGrid& grid)
{
  return tabulate(grid, [&](double t) { return empirical_ft_at(sample, t); });
}

InversionResult mc_inverse(const FourierEstimate& estimate,
                           std::size_t R,
                           const std::vector<double>& ygrid,
                           InversionNorm norm)
{
  const std::size_t c = estimate.grid.center();
  if (R == 0 || R > c)
    throw WindowError("inversion window half-width " + std::to_string(R) + " outside 1.." +
                      std::to_string(c));
  const double gamma = estimate.grid[c + R];
  const double K = static_cast<double>(estimate.size());
  const double prefactor = norm == InversionNorm::Standard
                             ? gamma / (std::numbers::pi * (K + 2.0))
                             : gamma / (std::numbers::pi * (2.0 * static_cast<double>(R) + 1.0));

  InversionResult out;
  out.density.resize(ygrid.size());
  for (std::size_t m = 0; m < ygrid.size(); ++m) {
    const double y = ygrid[m];
    double re = 0.0, im = 0.0;
    for (std::size_t k = c - R; k <= c + R; ++k) {
      const double t = estimate.grid[k];
      const cplx e(std::cos(t * y), -std::sin(t * y));
      const cplx term = estimate.values[k] * e;
      re += term.real();
      im += term.imag();
    }
    out.density[m] = prefactor * re;
    out.max_imaginary = std::max(out.max_imaginary, std::abs(prefactor * im));
  }
  return out;
}

} // namespace deconvkit
