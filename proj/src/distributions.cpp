#include "deconvkit/distributions.hpp"
#include "deconvkit/errors.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <functional>
#include <numbers>
#include <numeric>

namespace deconvkit {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg)
{
  if (!ok)
    throw ParameterError(msg);
}

bool positive(double v)
{
  return std::isfinite(v) && v > 0.0;
}

double gamma_pdf(double y, double shape, double rate)
{
  if (y < 0.0)
    return 0.0;
  if (y == 0.0) {
    if (shape < 1.0)
      return inf;
    return shape == 1.0 ? rate : 0.0;
  }
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(y) -
                  rate * y - std::lgamma(shape));
}

std::complex<double> gamma_cf(double t, double shape, double rate)
{
  return std::pow(std::complex<double>(1.0, -t / rate), -shape);
}

double laplace_draw(std::mt19937_64& rng, double location, double scale)
{
  std::exponential_distribution<double> e(1.0);
  double a = e(rng);
  double b = e(rng);
  return location + scale * (a - b);
}

// k-fold Laplace density: (1/pi) * int_0^inf cos(t y) (1 + t^2)^(-k) dt,
// tabulated once per k and interpolated.
class KFoldTable
{
public:
  explicit KFoldTable(int k)
    : k_(k)
    , span_(10.0 + 5.0 * std::sqrt(2.0 * k))
  {
    const double h = 0.02;
    const auto n = static_cast<std::size_t>(std::ceil(span_ / h)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = direct(static_cast<double>(i) * h);
    span_ = static_cast<double>(n - 1) * h;
    // right-hand slope at 0: -1/2 for the k = 1 cusp, 0 otherwise
    double d0 = k == 1 ? -0.5 : 0.0;
    spline_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      v.begin(), v.end(), 0.0, h, d0);
  }

  double operator()(double y) const
  {
    y = std::abs(y);
    if (y <= span_)
      return std::max(0.0, (*spline_)(y));
    return tail(y);
  }

  /// e^{-y} sum_j C(k-1+j, j) y^{k-1-j} / (2^{k+j} (k-1-j)!); all terms are
  /// positive, so this is stable where the cosine integral is slow.
  double tail(double y) const
  {
    const int k = k_;
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      const double logc = std::lgamma(k + j) - std::lgamma(j + 1.0) - std::lgamma(static_cast<double>(k)) -
                          std::lgamma(static_cast<double>(k - j)) - (k + j) * std::log(2.0);
      s += std::exp(logc + (k - 1 - j) * std::log(y) - y);
    }
    return s;
  }

  double direct(double y) const
  {
    const int k = k_;
    if (y == 0.0) {
      return std::exp(std::lgamma(k - 0.5) - std::lgamma(static_cast<double>(k))) /
             (2.0 * std::sqrt(std::numbers::pi));
    }
    thread_local boost::math::quadrature::ooura_fourier_cos<double> integrator;
    auto f = [k](double t) { return std::pow(1.0 + t * t, -k); };
    auto [value, err] = integrator.integrate(f, y);
    (void)err;
    return value / std::numbers::pi;
  }

private:
  int k_;
  double span_;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

const KFoldTable& kfold_table(int k)
{
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<KFoldTable>> tables;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = tables[k];
  if (!slot)
    slot = std::make_unique<KFoldTable>(k);
  return *slot;
}

double integrate_segment(const std::function<double(double)>& f, double a, double b)
{
  if (!(a < b))
    return 0.0;
  const double tol = 1e-10;
  if (std::isfinite(a) && std::isfinite(b)) {
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b, tol);
  }
  thread_local boost::math::quadrature::exp_sinh<double> es;
  if (std::isfinite(a))
    return es.integrate(f, a, inf, tol);
  if (std::isfinite(b))
    return es.integrate(f, -inf, b, tol);
  throw ParameterError("integration segment must have a finite end");
}

double convolution_pdf(const DistributionSpec& a, const DistributionSpec& b, double y)
{
  auto [alo, ahi] = support(a);
  auto [blo, bhi] = support(b);
  double lo = std::max(alo, y - bhi);
  double hi = std::min(ahi, y - blo);
  if (!(lo < hi))
    return 0.0;

  std::function<double(double)> f = [&](double s) {
    double v = pdf(a, s) * pdf(b, y - s);
    return std::isfinite(v) ? v : 0.0;
  };

  double c = y - mean(b);
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    c = std::clamp(c, lo, hi);
    if (!std::isfinite(lo) && !std::isfinite(hi))
      return integrate_segment(f, -inf, c) + integrate_segment(f, c, inf);
    return integrate_segment(f, lo, c) + integrate_segment(f, c, hi);
  }
  return integrate_segment(f, lo, hi);
}

} // namespace

std::string family_name(Family f)
{
  switch (f) {
    case Family::Normal: return "Normal";
    case Family::Laplace: return "Laplace";
    case Family::Exponential: return "Exponential";
    case Family::Gamma: return "Gamma";
    case Family::Weibull: return "Weibull";
    case Family::Gumbel: return "Gumbel";
    case Family::ChiSquare: return "ChiSquare";
    case Family::ScaledChiSquare: return "ScaledChiSquare";
    case Family::LaplaceKFold: return "LaplaceKFold";
    case Family::Mixture: return "Mixture";
    case Family::Convolution: return "Convolution";
  }
  return "Unknown";
}

Family family_from_name(const std::string& name)
{
  static const std::map<std::string, Family> names = {
    { "Normal", Family::Normal },
    { "Laplace", Family::Laplace },
    { "Exponential", Family::Exponential },
    { "Gamma", Family::Gamma },
    { "Weibull", Family::Weibull },
    { "Gumbel", Family::Gumbel },
    { "ChiSquare", Family::ChiSquare },
    { "ScaledChiSquare", Family::ScaledChiSquare },
    { "LaplaceKFold", Family::LaplaceKFold },
    { "Mixture", Family::Mixture },
    { "Convolution", Family::Convolution },
  };
  auto it = names.find(name);
  if (it == names.end())
    throw ParameterError("unknown distribution family '" + name + "'");
  return it->second;
}

DistributionSpec DistributionSpec::normal(double mean, double sd)
{
  DistributionSpec s{ Family::Normal, { mean, sd }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::laplace(double location, double scale)
{
  DistributionSpec s{ Family::Laplace, { location, scale }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::exponential(double rate)
{
  DistributionSpec s{ Family::Exponential, { rate }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::gamma(double shape, double rate)
{
  DistributionSpec s{ Family::Gamma, { shape, rate }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::weibull(double shape, double scale)
{
  DistributionSpec s{ Family::Weibull, { shape, scale }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::gumbel(double location, double scale)
{
  DistributionSpec s{ Family::Gumbel, { location, scale }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::chi_square(double df)
{
  DistributionSpec s{ Family::ChiSquare, { df }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::scaled_chi_square(double df, double divisor)
{
  DistributionSpec s{ Family::ScaledChiSquare, { df, divisor }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::laplace_kfold(int k)
{
  DistributionSpec s{ Family::LaplaceKFold, { static_cast<double>(k) }, {}, {} };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::mixture(std::vector<double> weights,
                                           std::vector<DistributionSpec> components)
{
  DistributionSpec s{ Family::Mixture, {}, std::move(weights), std::move(components) };
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::convolution(DistributionSpec a, DistributionSpec b)
{
  DistributionSpec s{ Family::Convolution, {}, {}, { std::move(a), std::move(b) } };
  s.validate();
  return s;
}

void DistributionSpec::validate() const
{
  const std::string name = family_name(family);
  auto need = [&](std::size_t count) {
    require(p.size() == count, name + " expects " + std::to_string(count) + " parameter(s)");
    for (double v : p)
      require(std::isfinite(v), name + " parameters must be finite");
  };

  switch (family) {
    case Family::Normal:
    case Family::Laplace:
    case Family::Gumbel:
      need(2);
      require(positive(p[1]), name + " scale must be > 0");
      break;
    case Family::Exponential:
      need(1);
      require(positive(p[0]), "Exponential rate must be > 0");
      break;
    case Family::Gamma:
    case Family::Weibull:
      need(2);
      require(positive(p[0]) && positive(p[1]), name + " parameters must be > 0");
      break;
    case Family::ChiSquare:
      need(1);
      require(positive(p[0]), "ChiSquare df must be > 0");
      break;
    case Family::ScaledChiSquare:
      need(2);
      require(positive(p[0]) && positive(p[1]), "ScaledChiSquare df and divisor must be > 0");
      break;
    case Family::LaplaceKFold:
      need(1);
      require(p[0] >= 1.0 && p[0] == std::floor(p[0]) && p[0] <= 1000.0,
              "LaplaceKFold needs an integer k >= 1");
      break;
    case Family::Mixture: {
      require(!parts.empty(), "Mixture needs at least one component");
      require(weights.size() == parts.size(), "Mixture weights and components differ in length");
      double total = 0.0;
      for (double w : weights) {
        require(std::isfinite(w) && w >= 0.0, "Mixture weights must be nonnegative");
        total += w;
      }
      require(std::abs(total - 1.0) <= 1e-12, "Mixture weights must sum to 1");
      for (const auto& c : parts)
        c.validate();
      break;
    }
    case Family::Convolution:
      require(parts.size() == 2, "Convolution holds exactly two components");
      for (const auto& c : parts)
        c.validate();
      break;
  }
}

Sample::Sample(std::vector<double> values)
  : values_(std::move(values))
{
  if (values_.empty())
    throw InsufficientDataError("sample must not be empty");
  for (double v : values_)
    if (!std::isfinite(v))
      throw ParameterError("sample values must be finite");
}

double Sample::mean() const
{
  double s = 0.0;
  for (double v : values_)
    s += v;
  return s / static_cast<double>(values_.size());
}

double Sample::variance() const
{
  const std::size_t n = values_.size();
  if (n < 2)
    return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (double v : values_)
    ss += (v - m) * (v - m);
  return ss / static_cast<double>(n - 1);
}

double Sample::min() const
{
  return *std::min_element(values_.begin(), values_.end());
}

double Sample::max() const
{
  return *std::max_element(values_.begin(), values_.end());
}

ReplicateSample::ReplicateSample(std::vector<double> first, std::vector<double> second)
{
  if (first.size() != second.size())
    throw LengthMismatchError("replicate columns differ in length (" +
                              std::to_string(first.size()) + " vs " +
                              std::to_string(second.size()) + ")");
  first_ = Sample(std::move(first));
  second_ = Sample(std::move(second));
}

Sample ReplicateSample::pooled() const
{
  std::vector<double> all(first_.values());
  all.insert(all.end(), second_.begin(), second_.end());
  return Sample(std::move(all));
}

double Sampler::draw(const DistributionSpec& s)
{
  const auto& p = s.p;
  switch (s.family) {
    case Family::Normal:
      return std::normal_distribution<double>(p[0], p[1])(engine_);
    case Family::Laplace:
      return laplace_draw(engine_, p[0], p[1]);
    case Family::Exponential:
      return std::exponential_distribution<double>(p[0])(engine_);
    case Family::Gamma:
      return std::gamma_distribution<double>(p[0], 1.0 / p[1])(engine_);
    case Family::Weibull:
      return std::weibull_distribution<double>(p[0], p[1])(engine_);
    case Family::Gumbel:
      return std::extreme_value_distribution<double>(p[0], p[1])(engine_);
    case Family::ChiSquare:
      return std::chi_squared_distribution<double>(p[0])(engine_);
    case Family::ScaledChiSquare:
      return std::chi_squared_distribution<double>(p[0])(engine_) / p[1];
    case Family::LaplaceKFold: {
      double sum = 0.0;
      for (int i = 0; i < static_cast<int>(p[0]); ++i)
        sum += laplace_draw(engine_, 0.0, 1.0);
      return sum;
    }
    case Family::Mixture: {
      double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
      double acc = 0.0;
      std::size_t pick = s.parts.size() - 1;
      for (std::size_t i = 0; i < s.parts.size(); ++i) {
        acc += s.weights[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      return draw(s.parts[pick]);
    }
    case Family::Convolution: {
      double a = draw(s.parts[0]);
      return a + draw(s.parts[1]);
    }
  }
  throw ParameterError("unhandled family");
}

std::vector<double> Sampler::draw(const DistributionSpec& spec, std::size_t n)
{
  std::vector<double> out(n);
  for (auto& v : out)
    v = draw(spec);
  return out;
}

Sample sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed)
{
  spec.validate();
  if (n < 1)
    throw ParameterError("sample size must be >= 1");
  Sampler sampler(seed);
  return Sample(sampler.draw(spec, n));
}

double pdf(const DistributionSpec& s, double y)
{
  const auto& p = s.p;
  switch (s.family) {
    case Family::Normal: {
      double z = (y - p[0]) / p[1];
      return std::exp(-0.5 * z * z) / (p[1] * std::sqrt(2.0 * std::numbers::pi));
    }
    case Family::Laplace:
      return std::exp(-std::abs(y - p[0]) / p[1]) / (2.0 * p[1]);
    case Family::Exponential:
      return y < 0.0 ? 0.0 : p[0] * std::exp(-p[0] * y);
    case Family::Gamma:
      return gamma_pdf(y, p[0], p[1]);
    case Family::Weibull: {
      if (y < 0.0)
        return 0.0;
      double u = y / p[1];
      if (u == 0.0)
        return p[0] < 1.0 ? inf : (p[0] == 1.0 ? 1.0 / p[1] : 0.0);
      return (p[0] / p[1]) * std::pow(u, p[0] - 1.0) * std::exp(-std::pow(u, p[0]));
    }
    case Family::Gumbel: {
      double z = (y - p[0]) / p[1];
      return std::exp(-(z + std::exp(-z))) / p[1];
    }
    case Family::ChiSquare:
      return gamma_pdf(y, 0.5 * p[0], 0.5);
    case Family::ScaledChiSquare:
      return p[1] * gamma_pdf(p[1] * y, 0.5 * p[0], 0.5);
    case Family::LaplaceKFold:
      return kfold_table(static_cast<int>(p[0]))(y);
    case Family::Mixture: {
      double total = 0.0;
      for (std::size_t i = 0; i < s.parts.size(); ++i)
        if (s.weights[i] > 0.0)
          total += s.weights[i] * pdf(s.parts[i], y);
      return total;
    }
    case Family::Convolution:
      return convolution_pdf(s.parts[0], s.parts[1], y);
  }
  throw ParameterError("unhandled family");
}

bool has_closed_form_cf(const DistributionSpec& s)
{
  switch (s.family) {
    case Family::Weibull:
    case Family::Gumbel:
      return false;
    case Family::Mixture:
    case Family::Convolution:
      return std::all_of(s.parts.begin(), s.parts.end(), has_closed_form_cf);
    default:
      return true;
  }
}

std::complex<double> cf(const DistributionSpec& s, double t)
{
  if (!has_closed_form_cf(s))
    throw UnsupportedFamilyError("no closed-form characteristic function for " +
                                 family_name(s.family));
  if (t == 0.0)
    return { 1.0, 0.0 };
  const auto& p = s.p;
  const std::complex<double> i(0.0, 1.0);
  switch (s.family) {
    case Family::Normal:
      return std::exp(i * p[0] * t - 0.5 * p[1] * p[1] * t * t);
    case Family::Laplace:
      return std::exp(i * p[0] * t) / (1.0 + p[1] * p[1] * t * t);
    case Family::Exponential:
      return 1.0 / std::complex<double>(1.0, -t / p[0]);
    case Family::Gamma:
      return gamma_cf(t, p[0], p[1]);
    case Family::ChiSquare:
      return gamma_cf(t, 0.5 * p[0], 0.5);
    case Family::ScaledChiSquare:
      return gamma_cf(t, 0.5 * p[0], 0.5 * p[1]);
    case Family::LaplaceKFold:
      return std::pow(1.0 + t * t, -p[0]);
    case Family::Mixture: {
      std::complex<double> total = 0.0;
      for (std::size_t j = 0; j < s.parts.size(); ++j)
        total += s.weights[j] * cf(s.parts[j], t);
      return total;
    }
    case Family::Convolution:
      return cf(s.parts[0], t) * cf(s.parts[1], t);
    default:
      break;
  }
  throw UnsupportedFamilyError("no closed-form characteristic function for " +
                               family_name(s.family));
}

double mean(const DistributionSpec& s)
{
  const auto& p = s.p;
  switch (s.family) {
    case Family::Normal:
    case Family::Laplace:
      return p[0];
    case Family::Exponential:
      return 1.0 / p[0];
    case Family::Gamma:
      return p[0] / p[1];
    case Family::Weibull:
      return p[1] * std::tgamma(1.0 + 1.0 / p[0]);
    case Family::Gumbel:
      return p[0] + p[1] * std::numbers::egamma;
    case Family::ChiSquare:
      return p[0];
    case Family::ScaledChiSquare:
      return p[0] / p[1];
    case Family::LaplaceKFold:
      return 0.0;
    case Family::Mixture: {
      double m = 0.0;
      for (std::size_t i = 0; i < s.parts.size(); ++i)
        m += s.weights[i] * mean(s.parts[i]);
      return m;
    }
    case Family::Convolution:
      return mean(s.parts[0]) + mean(s.parts[1]);
  }
  throw ParameterError("unhandled family");
}

double variance(const DistributionSpec& s)
{
  const auto& p = s.p;
  switch (s.family) {
    case Family::Normal:
      return p[1] * p[1];
    case Family::Laplace:
      return 2.0 * p[1] * p[1];
    case Family::Exponential:
      return 1.0 / (p[0] * p[0]);
    case Family::Gamma:
      return p[0] / (p[1] * p[1]);
    case Family::Weibull: {
      double g1 = std::tgamma(1.0 + 1.0 / p[0]);
      double g2 = std::tgamma(1.0 + 2.0 / p[0]);
      return p[1] * p[1] * (g2 - g1 * g1);
    }
    case Family::Gumbel:
      return p[1] * p[1] * std::numbers::pi * std::numbers::pi / 6.0;
    case Family::ChiSquare:
      return 2.0 * p[0];
    case Family::ScaledChiSquare:
      return 2.0 * p[0] / (p[1] * p[1]);
    case Family::LaplaceKFold:
      return 2.0 * p[0];
    case Family::Mixture: {
      double m = mean(s);
      double second = 0.0;
      for (std::size_t i = 0; i < s.parts.size(); ++i) {
        double mi = mean(s.parts[i]);
        second += s.weights[i] * (variance(s.parts[i]) + mi * mi);
      }
      return second - m * m;
    }
    case Family::Convolution:
      return variance(s.parts[0]) + variance(s.parts[1]);
  }
  throw ParameterError("unhandled family");
}

std::pair<double, double> support(const DistributionSpec& s)
{
  switch (s.family) {
    case Family::Exponential:
    case Family::Gamma:
    case Family::Weibull:
    case Family::ChiSquare:
    case Family::ScaledChiSquare:
      return { 0.0, inf };
    case Family::Mixture: {
      double lo = inf, hi = -inf;
      for (const auto& c : s.parts) {
        auto [a, b] = support(c);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
      return { lo, hi };
    }
    case Family::Convolution: {
      auto [a0, a1] = support(s.parts[0]);
      auto [b0, b1] = support(s.parts[1]);
      return { a0 + b0, a1 + b1 };
    }
    default:
      return { -inf, inf };
  }
}

} // namespace deconvkit
