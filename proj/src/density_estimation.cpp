#include "deconvkit/density_estimation.hpp"
#include "deconvkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace deconvkit {

namespace {

constexpr int wand_gridsize = 401;

// Linear binning onto an equispaced grid (all points fall inside the grid).
std::vector<double> linear_bin(const std::vector<double>& x, double a, double b, int M)
{
  std::vector<double> counts(M, 0.0);
  const double delta = (b - a) / (M - 1);
  for (double v : x) {
    double pos = (v - a) / delta;
    auto li = static_cast<long>(std::floor(pos));
    double rem = pos - static_cast<double>(li);
    if (li < 0) {
      counts.front() += 1.0;
    } else if (li >= M - 1) {
      counts.back() += 1.0;
    } else {
      counts[li] += 1.0 - rem;
      counts[li + 1] += rem;
    }
  }
  return counts;
}

// Binned kernel estimate of the second-derivative density functional
// psi_2 = int f f'' with a Gaussian kernel of bandwidth h.
double binned_psi2(const std::vector<double>& counts, double a, double b, double h)
{
  const int M = static_cast<int>(counts.size());
  const double delta = (b - a) / (M - 1);
  const double tau = 6.0;
  const int L = std::min(static_cast<int>(std::floor(tau * h / delta)), M - 1);
  std::vector<double> kappa(L + 1);
  for (int l = 0; l <= L; ++l) {
    double u = l * delta / h;
    double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    kappa[l] = (u * u - 1.0) * phi / (h * h * h);
  }
  double n = 0.0;
  for (double c : counts)
    n += c;
  double total = 0.0;
  for (int i = 0; i < M; ++i) {
    if (counts[i] == 0.0)
      continue;
    double row = 0.0;
    int j0 = std::max(0, i - L);
    int j1 = std::min(M - 1, i + L);
    for (int j = j0; j <= j1; ++j)
      row += counts[j] * kappa[std::abs(i - j)];
    total += counts[i] * row;
  }
  return total / (n * n);
}

} // namespace

double Histogram::total() const
{
  double s = 0.0;
  for (double c : counts)
    s += c;
  return s;
}

double wand_bin_width(const std::vector<double>& x)
{
  const std::size_t n = x.size();
  if (n < 10)
    throw InsufficientDataError("bin-count selection needs at least 10 observations");
  Sample s(x);
  const double lo = s.min();
  const double hi = s.max();
  if (!(hi > lo))
    throw InsufficientDataError("sample has zero spread");

  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(s.variance());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  double scale = sd;
  if (iqr > 0.0)
    scale = std::min(sd, iqr / 1.349);

  const double nd = static_cast<double>(n);
  const double m = s.mean();
  std::vector<double> standardized(n);
  for (std::size_t i = 0; i < n; ++i)
    standardized[i] = (x[i] - m) / scale;
  const double sa = (lo - m) / scale;
  const double sb = (hi - m) / scale;

  auto counts = linear_bin(standardized, sa, sb, wand_gridsize);
  const double alpha = std::pow(2.0 / (3.0 * nd), 0.2) * std::sqrt(2.0);
  const double psi2 = binned_psi2(counts, sa, sb, alpha);
  if (!(psi2 < 0.0) || !std::isfinite(psi2))
    return 3.49 * sd * std::pow(nd, -1.0 / 3.0);
  return scale * std::cbrt(6.0 / (-psi2 * nd));
}

std::size_t select_bin_count(const Sample& sample)
{
  const double width = wand_bin_width(sample.values());
  const double range = sample.max() - sample.min();
  const double bins = std::ceil(range / width);
  return static_cast<std::size_t>(std::max(5.0, bins));
}

Histogram build_histogram(const Sample& sample, std::size_t n_bins)
{
  if (n_bins < 2)
    throw ParameterError("histogram needs at least 2 bins");
  const double lo = sample.min();
  const double hi = sample.max();
  if (!(hi > lo))
    throw InsufficientDataError("sample has zero spread");

  Histogram h;
  h.width = (hi - lo) / static_cast<double>(n_bins);
  h.boundaries.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i)
    h.boundaries[i] = lo + static_cast<double>(i) * h.width;
  h.boundaries.back() = hi;
  h.midpoints.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i)
    h.midpoints[i] = lo + (static_cast<double>(i) + 0.5) * h.width;
  h.counts.assign(n_bins, 0.0);
  for (double v : sample) {
    // bin i holds (b_i, b_{i+1}]; the minimum goes to the first bin
    double pos = (v - lo) / h.width;
    auto i = static_cast<long>(std::ceil(pos)) - 1;
    i = std::clamp(i, 0L, static_cast<long>(n_bins) - 1);
    if (v > h.boundaries[i + 1] && i + 1 < static_cast<long>(n_bins))
      ++i;
    else if (i > 0 && v <= h.boundaries[i])
      --i;
    h.counts[i] += 1.0;
  }
  return h;
}

double quantile(std::vector<double> v, double p)
{
  if (v.empty())
    throw InsufficientDataError("quantile of an empty sample");
  if (!std::is_sorted(v.begin(), v.end()))
    std::sort(v.begin(), v.end());
  p = std::clamp(p, 0.0, 1.0);
  const double h = static_cast<double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> place_knots(const Histogram& hist, const Sample& sample, int J, KnotAnchor anchor)
{
  if (J < 2)
    throw ParameterError("at least 2 knots are required");
  const std::size_t nI = hist.bins();

  double r = 0.5;
  if (anchor == KnotAnchor::Mode) {
    auto top = std::max_element(hist.counts.begin(), hist.counts.end()) - hist.counts.begin();
    const double mode = hist.midpoints[top];
    std::size_t below = 0;
    for (double m : hist.midpoints)
      if (m <= mode)
        ++below;
    r = static_cast<double>(below) / static_cast<double>(nI);
  }

  const double d = (J + 1) / 2.0;
  std::vector<double> levels;
  for (int i = 1; i <= J / 2; ++i)
    levels.push_back(i * r / d);
  const int first_right = (J + 1) / 2; // ceil(J / 2)
  for (int j = first_right; j <= J; ++j) {
    if (J % 2 == 0 && j == J / 2)
      continue; // index shared with the left set
    levels.push_back(1.0 - (1.0 - r) * (J - j + 1) / d);
  }

  std::vector<double> sorted(sample.values());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();

  // A knot is kept only when a midpoint separates it from every other knot;
  // two knots with no count between them leave a spline piece unconstrained.
  // Quantiles beyond the outer midpoints are pulled back onto them.
  const auto& mids = hist.midpoints;
  std::vector<std::size_t> taken;
  std::vector<double> knots;
  auto offer = [&](double q) {
    const double v = std::clamp(quantile(sorted, q), mids.front(), mids.back());
    if (!(v > lo && v < hi))
      return;
    const auto cell = static_cast<std::size_t>(std::upper_bound(mids.begin(), mids.end(), v) - mids.begin());
    if (std::find(taken.begin(), taken.end(), cell) != taken.end())
      return;
    taken.push_back(cell);
    knots.push_back(v);
  };

  std::sort(levels.begin(), levels.end());
  for (double q : levels)
    offer(q);
  if (static_cast<int>(knots.size()) < J)
    offer(0.5);
  for (int j = 1; j <= J && static_cast<int>(knots.size()) < J; ++j)
    offer(static_cast<double>(j) / (J + 1));
  std::sort(knots.begin(), knots.end());
  if (static_cast<int>(knots.size()) < J)
    throw DegenerateKnotsError("only " + std::to_string(knots.size()) + " separable knots available, " +
                               std::to_string(J) + " requested");
  return knots;
}

NaturalSplineBasis::NaturalSplineBasis(std::vector<double> interior_knots, double lo, double hi)
  : interior_(std::move(interior_knots))
  , lo_(lo)
  , hi_(hi)
{
  if (!(hi > lo))
    throw ParameterError("spline range must have positive width");
  scaled_.push_back(0.0);
  for (double k : interior_) {
    if (!(k > lo && k < hi))
      throw ParameterError("interior knots must lie strictly inside the range");
    scaled_.push_back((k - lo) / (hi - lo));
  }
  scaled_.push_back(1.0);
  if (!std::is_sorted(scaled_.begin(), scaled_.end()) ||
      std::adjacent_find(scaled_.begin(), scaled_.end()) != scaled_.end())
    throw ParameterError("knots must be strictly increasing");
}

Eigen::VectorXd NaturalSplineBasis::row(double x) const
{
  const std::size_t K = scaled_.size(); // knots including boundaries
  Eigen::VectorXd out(K);
  const double u = (x - lo_) / (hi_ - lo_);
  auto cube = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  auto dk = [&](std::size_t k) {
    return (cube(u - scaled_[k]) - cube(u - scaled_[K - 1])) / (scaled_[K - 1] - scaled_[k]);
  };
  out[0] = 1.0;
  out[1] = u;
  const double last = dk(K - 2);
  for (std::size_t k = 0; k + 2 < K; ++k)
    out[k + 2] = dk(k) - last;
  return out;
}

Eigen::MatrixXd NaturalSplineBasis::matrix(const std::vector<double>& x) const
{
  Eigen::MatrixXd X(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) = row(x[i]).transpose();
  return X;
}

DensityFit::DensityFit(NaturalSplineBasis basis,
                       Eigen::VectorXd coefficients,
                       double normalizer,
                       double deviance,
                       int iterations)
  : basis_(std::move(basis))
  , beta_(std::move(coefficients))
  , normalizer_(normalizer)
  , deviance_(deviance)
  , iterations_(iterations)
{}

double DensityFit::operator()(double x) const
{
  if (!(x >= lo() && x <= hi()))
    return 0.0;
  return std::exp(basis_.row(x).dot(beta_)) / normalizer_;
}

double eval_density(const DensityFit& fit, double x)
{
  return fit(x);
}

namespace {

double deviance_of(const Eigen::VectorXd& c, const Eigen::VectorXd& mu)
{
  double dev = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    double term = -(c[i] - mu[i]);
    if (c[i] > 0.0)
      term += c[i] * std::log(c[i] / mu[i]);
    dev += term;
  }
  return 2.0 * dev;
}

} // namespace

DensityFit fit_poisson_spline(const Histogram& hist, const std::vector<double>& knots)
{
  NaturalSplineBasis basis(knots, hist.boundaries.front(), hist.boundaries.back());
  const Eigen::MatrixXd X = basis.matrix(hist.midpoints);
  if (X.rows() < X.cols())
    throw InsufficientDataError("fewer histogram bins (" + std::to_string(X.rows()) +
                                ") than spline basis functions (" + std::to_string(X.cols()) + ")");

  const Eigen::Index m = X.rows();
  Eigen::VectorXd c(m);
  for (Eigen::Index i = 0; i < m; ++i)
    c[i] = hist.counts[i];

  Eigen::VectorXd mu = (c.array() + 0.1).matrix();
  Eigen::VectorXd eta = mu.array().log().matrix();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  std::vector<double> trace;
  double dev = deviance_of(c, mu);
  int iter = 0;
  bool converged = false;

  for (iter = 1; iter <= 50; ++iter) {
    Eigen::VectorXd z = eta + ((c - mu).array() / mu.array()).matrix();
    Eigen::VectorXd w = mu.array().sqrt().matrix();
    Eigen::MatrixXd Xw = w.asDiagonal() * X;
    Eigen::VectorXd zw = w.cwiseProduct(z);
    beta = Xw.colPivHouseholderQr().solve(zw);
    eta = X * beta;
    mu = eta.array().exp().matrix();
    double next = deviance_of(c, mu);
    trace.push_back(next);
    if (!beta.allFinite() || !std::isfinite(next))
      throw FitFailureError("Poisson regression diverged at iteration " + std::to_string(iter), trace);
    bool done = std::abs(next - dev) / (std::abs(next) + 0.1) < 1e-8;
    dev = next;
    if (done) {
      converged = true;
      break;
    }
  }
  if (!converged)
    iter = 50;

  return DensityFit(std::move(basis), std::move(beta), hist.width * hist.total(), dev, iter);
}

double poisson_deviance(const Histogram& hist, const DensityFit& fit)
{
  const Eigen::Index m = static_cast<Eigen::Index>(hist.bins());
  Eigen::VectorXd c(m), mu(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    c[i] = hist.counts[i];
    mu[i] = fit(hist.midpoints[i]) * fit.normalizer();
  }
  return deviance_of(c, mu);
}

DensityFit estimate_density(const Sample& sample, const DensityOptions& options)
{
  if (options.df < 3)
    throw ParameterError("spline degrees of freedom must be >= 3");
  const std::size_t bins = options.bins ? *options.bins : select_bin_count(sample);
  Histogram hist = build_histogram(sample, bins);
  auto knots = place_knots(hist, sample, options.df - 1, options.anchor);
  return fit_poisson_spline(hist, knots);
}

} // namespace deconvkit
