#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace deconvkit {

enum class Family
{
  Normal,
  Laplace,
  Exponential,
  Gamma,
  Weibull,
  Gumbel,
  ChiSquare,
  ScaledChiSquare,
  LaplaceKFold,
  Mixture,
  Convolution
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// A parametric distribution. Construct through the named factories, which
/// validate their arguments; `validate()` re-checks a hand-built spec.
///
/// Parameter layout in `p`:
///   Normal(mean, sd), Laplace(location, scale), Exponential(rate),
///   Gamma(shape, rate), Weibull(shape, scale), Gumbel(location, scale),
///   ChiSquare(df), ScaledChiSquare(df, divisor), LaplaceKFold(k).
/// Mixture uses `weights` + `parts`; Convolution uses exactly two `parts`.
struct DistributionSpec
{
  Family family = Family::Normal;
  std::vector<double> p;
  std::vector<double> weights;
  std::vector<DistributionSpec> parts;

  static DistributionSpec normal(double mean, double sd);
  static DistributionSpec laplace(double location, double scale);
  static DistributionSpec exponential(double rate);
  static DistributionSpec gamma(double shape, double rate);
  static DistributionSpec weibull(double shape, double scale);
  static DistributionSpec gumbel(double location, double scale);
  static DistributionSpec chi_square(double df);
  static DistributionSpec scaled_chi_square(double df, double divisor);
  static DistributionSpec laplace_kfold(int k);
  static DistributionSpec mixture(std::vector<double> weights,
                                  std::vector<DistributionSpec> components);
  static DistributionSpec convolution(DistributionSpec a, DistributionSpec b);

  /// Throws ParameterError when the spec breaks a family invariant.
  void validate() const;
};

/// Observed values. Nonempty, all finite.
class Sample
{
public:
  Sample() = default;
  explicit Sample(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  double mean() const;
  /// Unbiased sample variance (n - 1 denominator); 0 for a single value.
  double variance() const;
  double min() const;
  double max() const;

private:
  std::vector<double> values_;
};

/// Two aligned replicate columns of the same latent values.
class ReplicateSample
{
public:
  ReplicateSample(std::vector<double> first, std::vector<double> second);

  const Sample& first() const noexcept { return first_; }
  const Sample& second() const noexcept { return second_; }
  std::size_t size() const noexcept { return first_.size(); }
  /// Both columns stacked into one sample of size 2n.
  Sample pooled() const;

private:
  Sample first_;
  Sample second_;
};

/// Owns an RNG stream. Not meant to be shared between threads.
class Sampler
{
public:
  explicit Sampler(std::uint64_t seed)
    : engine_(seed)
  {}

  double draw(const DistributionSpec& spec);
  std::vector<double> draw(const DistributionSpec& spec, std::size_t n);

  std::mt19937_64& engine() noexcept { return engine_; }

private:
  std::mt19937_64 engine_;
};

Sample sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

double pdf(const DistributionSpec& spec, double y);
std::complex<double> cf(const DistributionSpec& spec, double t);
bool has_closed_form_cf(const DistributionSpec& spec);

double mean(const DistributionSpec& spec);
double variance(const DistributionSpec& spec);

/// Closed support [lo, hi]; infinite ends are +-infinity.
std::pair<double, double> support(const DistributionSpec& spec);

} // namespace deconvkit
