#pragma once

// Reference computations written independently of the library, used as
// ground truth by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double normal_pdf(double x, double mean = 0.0, double sd = 1.0)
{
  const double u = (x - mean) / sd;
  return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

inline double gamma_pdf(double x, double shape, double rate)
{
  if (x <= 0.0)
    return 0.0;
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape));
}

inline double laplace_pdf(double x, double loc, double scale)
{
  return std::exp(-std::abs(x - loc) / scale) / (2.0 * scale);
}

/// Density of the sum of k standard Laplace variables, from the finite
/// series  e^{-|x|} / ((k-1)! 2^k) * sum_j (k-1+j)! / (j! (k-1-j)!) |x|^{k-1-j} / 2^j.
inline double laplace_kfold_pdf(int k, double x)
{
  const double ax = std::abs(x);
  double s = 0.0;
  for (int j = 0; j < k; ++j) {
    const double logc = std::lgamma(k + j) - std::lgamma(j + 1) - std::lgamma(k - j);
    const double term = std::exp(logc - j * std::log(2.0));
    s += term * std::pow(ax, k - 1 - j);
  }
  return std::exp(-ax - std::lgamma(k) - k * std::log(2.0)) * s;
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000)
{
  if (n % 2)
    ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// int f(x) e^{itx} dx by Simpson's rule.
inline std::complex<double> fourier(const std::function<double(double)>& f, double a, double b, double t, int n = 4000)
{
  const double re = simpson([&](double x) { return f(x) * std::cos(t * x); }, a, b, n);
  const double im = simpson([&](double x) { return f(x) * std::sin(t * x); }, a, b, n);
  return { re, im };
}

/// f tabulated at the n + 1 Simpson nodes of [a, b] (n even).
inline std::vector<double> tabulate(const std::function<double(double)>& f, double a, double b, int n)
{
  std::vector<double> v(n + 1);
  for (int i = 0; i <= n; ++i)
    v[i] = f(a + (b - a) * i / n);
  return v;
}

/// int f(x) e^{itx} dx by Simpson's rule from a table made by tabulate().
inline std::complex<double> fourier(const std::vector<double>& table, double a, double b, double t)
{
  const int n = static_cast<int>(table.size()) - 1;
  const double h = (b - a) / n;
  std::complex<double> s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double x = a + i * h;
    s += w * table[i] * std::complex<double>(std::cos(t * x), std::sin(t * x));
  }
  return s * h / 3.0;
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y)
{
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

inline double mean(const std::vector<double>& v)
{
  double s = 0.0;
  for (double d : v)
    s += d;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v)
{
  const double m = mean(v);
  double s = 0.0;
  for (double d : v)
    s += (d - m) * (d - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double sample_quantile(std::vector<double> v, double p)
{
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// One-stage plug-in histogram bin width evaluated without binning:
/// psi2 = n^-2 g^-3 sum_ij phi''((x_i - x_j) / g) on the standardized data,
/// g = (2 / (3n))^{1/5} sqrt(2), width = scale (6 / (-psi2 n))^{1/3}.
inline double plugin_bin_width(const std::vector<double>& x)
{
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt(variance(x));
  const double iqr = sample_quantile(x, 0.75) - sample_quantile(x, 0.25);
  const double scale = std::min(sd, iqr / 1.349);
  const double m = mean(x);
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    s[i] = (x[i] - m) / scale;
  const double g = std::pow(2.0 / (3.0 * n), 0.2) * std::sqrt(2.0);
  double sum = 0.0;
  for (double a : s)
    for (double b : s) {
      const double u = (a - b) / g;
      sum += (u * u - 1.0) * normal_pdf(u);
    }
  const double psi2 = sum / (n * n * g * g * g);
  return scale * std::cbrt(6.0 / (-psi2 * n));
}

/// Asymptotically optimal histogram width for a normal density.
inline double normal_reference_bin_width(double sd, double n)
{
  return std::cbrt(24.0 * std::sqrt(std::numbers::pi) / n) * sd;
}

} // namespace oracle
