#include "deconvkit/npfd.hpp"
#include "deconvkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace deconvkit {

void NpfdConfig::validate() const
{
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0))
    throw ParameterError("epsilon must lie in (0, 1)");
  if (delta && !(*delta > 0.0))
    throw ParameterError("delta must be positive");
  if (n_max < 1)
    throw ParameterError("n_max must be >= 1");
  if (K < 3 || K % 2 == 0)
    throw ParameterError("K must be odd and >= 3");
  if (!(t_max > 0.0))
    throw ParameterError("t_max must be positive");
  if (ell < 10)
    throw ParameterError("ell must be >= 10");
  if (df < 3 || (df_x && *df_x < 3))
    throw ParameterError("spline degrees of freedom must be >= 3");
  if (n_y < 2)
    throw ParameterError("n_y must be >= 2");
  if (force_n && *force_n < 1)
    throw ParameterError("forced power must be >= 1");
  if (max_doublings < 0)
    throw ParameterError("max_doublings must be >= 0");
}

bool uses_empirical_ft(const NpfdConfig& config, std::size_t n_x, std::size_t n_z)
{
  return config.use_empirical_ft || std::min(n_x, n_z) <= small_sample_limit;
}

double resolve_epsilon(const NpfdConfig& config, std::size_t n_x, std::size_t n_z)
{
  if (config.epsilon)
    return *config.epsilon;
  if (std::min(n_x, n_z) <= small_sample_limit)
    return std::max(0.1, 1.0 / std::sqrt(static_cast<double>(n_x)));
  return 0.001;
}

TransformedSamples transform_inputs(const Sample& x, const Sample& z, int N)
{
  if (N < 1)
    throw ParameterError("power N must be >= 1");
  const double Nd = static_cast<double>(N);
  TransformConstants c;
  c.a = 1.0 / std::sqrt(Nd);
  c.b_x = (1.0 / Nd - c.a) * x.mean();
  c.b_z = (1.0 / Nd - c.a) * z.mean();
  c.b_y = c.b_z - c.b_x;
  if (N == 1)
    return { x, z, c };

  auto apply = [&](const Sample& s, double b) {
    std::vector<double> out(s.values());
    for (double& v : out)
      v = c.a * v + b;
    return Sample(std::move(out));
  };
  return { apply(x, c.b_x), apply(z, c.b_z), c };
}

void check_variance_order(const Sample& x, const Sample& z)
{
  const double vx = x.variance();
  const double vz = z.variance();
  // equal spreads that differ only by rounding count as equal
  if (!(vz > vx * (1.0 + 1e-9)))
    throw VarianceOrderError("variance order violated: Var(z) = " + std::to_string(vz) +
                             " must exceed Var(x) = " + std::to_string(vx));
}

FourierEstimate FourierSource::on(const TGrid& grid) const
{
  const std::size_t c = grid.center();
  std::vector<cplx> values(grid.size());
  for (std::size_t m = 0; m <= c; ++m) {
    cplx v = at(grid[c + m]);
    values[c + m] = v;
    values[c - m] = std::conj(v);
  }
  values[c] = { values[c].real(), 0.0 };
  return FourierEstimate(grid, std::move(values));
}

namespace {

FourierSource empirical_source(const Sample& s)
{
  auto held = std::make_shared<const Sample>(s);
  return { [held](double t) { return empirical_ft_at(*held, t); } };
}

FourierSource spline_source(const Sample& s, int df, KnotAnchor anchor, double u, double v, std::size_t ell)
{
  DensityOptions opts;
  opts.df = df;
  opts.anchor = anchor;
  DensityFit fit = estimate_density(s, opts);
  auto nodes = std::make_shared<const std::pair<std::vector<double>, std::vector<double>>>(
    mc_nodes([&fit](double x) { return fit(x); }, u, v, ell));
  return { [nodes](double t) { return mc_fourier_at(nodes->first, nodes->second, t); } };
}

double powered_modulus(cplx q, int N)
{
  double m = std::abs(q);
  if (!std::isfinite(m))
    return std::numeric_limits<double>::infinity();
  return std::pow(m, N);
}

cplx integer_power(cplx q, int N)
{
  cplx out = q;
  for (int i = 1; i < N; ++i)
    out *= q;
  return out;
}

enum class ScanOutcome
{
  Found,
  GuardTripped,
  DeltaFailed,
  GridExhausted
};

struct ScanResult
{
  ScanOutcome outcome = ScanOutcome::GridExhausted;
  std::size_t k = 0;
  std::size_t k_min = 0; ///< end of the initial descent of |q|^N
};

ScanResult scan(const FourierSourcePair& src,
                const TGrid& grid,
                int N,
                double epsilon,
                double delta,
                bool rescale)
{
  const FourierEstimate fx = src.x.on(grid);
  const FourierEstimate fz = src.z.on(grid);
  const std::size_t c = grid.center();
  const cplx q0 = fz.values[c] / fx.values[c];
  const cplx scale = rescale ? q0 : cplx(1.0, 0.0);

  ScanResult r;
  r.k_min = c + 1;
  double previous = std::numeric_limits<double>::infinity();
  bool descending = true;
  for (std::size_t k = c + 1; k < grid.size(); ++k) {
    const cplx q = fz.values[k] / fx.values[k] / scale;
    const double m = powered_modulus(q, N);
    if (descending) {
      if (m <= previous && m <= 1.0)
        r.k_min = k;
      else
        descending = false;
      previous = m;
    }
    if (m > 1.0) {
      r.outcome = ScanOutcome::GuardTripped;
      r.k = k;
      return r;
    }
    if (m < epsilon) {
      const double t = grid[k] + delta;
      const cplx qd = src.z.at(t) / src.x.at(t) / scale;
      r.k = k;
      r.outcome = powered_modulus(qd, N) < epsilon ? ScanOutcome::Found : ScanOutcome::DeltaFailed;
      return r;
    }
  }
  r.outcome = ScanOutcome::GridExhausted;
  r.k = grid.size() - 1;
  return r;
}

} // namespace

FourierSourcePair make_ft_sources(const Sample& x_t, const Sample& z_t, const NpfdConfig& config)
{
  FourierSourcePair pair;
  pair.empirical = uses_empirical_ft(config, x_t.size(), z_t.size());
  if (pair.empirical) {
    pair.x = empirical_source(x_t);
    pair.z = empirical_source(z_t);
    return pair;
  }
  const double u = std::min(x_t.min(), z_t.min());
  const double v = std::max(x_t.max(), z_t.max());
  pair.x = spline_source(x_t, config.df_x.value_or(config.df), config.anchor, u, v, config.ell);
  pair.z = spline_source(z_t, config.df, config.anchor, u, v, config.ell);
  return pair;
}

std::pair<FourierEstimate, FourierEstimate>
estimate_ft_pair(const Sample& x_t, const Sample& z_t, const NpfdConfig& config, const TGrid& grid)
{
  auto src = make_ft_sources(x_t, z_t, config);
  return { src.x.on(grid), src.z.on(grid) };
}

PowerSelection select_power(const SourceFactory& factory, double epsilon, const NpfdConfig& config)
{
  config.validate();
  const int first = config.force_n ? *config.force_n : 1;
  const int last = config.force_n ? *config.force_n : config.n_max;

  PowerSelection fallback;
  for (int N = first; N <= last; ++N) {
    FourierSourcePair src = factory(N);
    for (int d = 0; d <= config.max_doublings; ++d) {
      const double t_max = config.t_max * std::ldexp(1.0, d);
      const TGrid grid(config.K, t_max);
      const double delta = config.delta.value_or(2.0 * grid.spacing());
      const ScanResult r = scan(src, grid, N, epsilon, delta, config.rescale_at_zero);
      const std::size_t c = grid.center();

      if (r.outcome == ScanOutcome::Found) {
        PowerSelection sel;
        sel.N = N;
        sel.R = r.k - c;
        sel.gamma = grid[r.k];
        sel.t_max = t_max;
        sel.doublings = d;
        sel.delta = delta;
        sel.sources = std::move(src);
        return sel;
      }
      if (r.outcome == ScanOutcome::GridExhausted && d < config.max_doublings)
        continue;

      if (N == last) {
        // No qualifying point: cut where |q|^N stops falling.
        const std::size_t k = r.k_min;
        fallback.N = N;
        fallback.R = k - c;
        fallback.gamma = grid[k];
        fallback.t_max = t_max;
        fallback.doublings = d;
        fallback.delta = delta;
        fallback.hit_n_max = true;
        fallback.sources = std::move(src);
      }
      break;
    }
  }
  return fallback;
}

PowerSelection select_power(const Sample& x, const Sample& z, const NpfdConfig& config)
{
  const double eps = resolve_epsilon(config, x.size(), z.size());
  return select_power(
    [&](int N) {
      auto tr = transform_inputs(x, z, N);
      return make_ft_sources(tr.x, tr.z, config);
    },
    eps,
    config);
}

FourierEstimate powered_quotient(const FourierEstimate& phi_x,
                                 const FourierEstimate& phi_z,
                                 int N,
                                 bool rescale,
                                 cplx* raw_at_zero)
{
  if (phi_x.size() != phi_z.size())
    throw LengthMismatchError("transform estimates differ in length");
  const std::size_t c = phi_x.grid.center();
  const cplx q0 = phi_z.values[c] / phi_x.values[c];
  if (raw_at_zero)
    *raw_at_zero = integer_power(q0, N);
  std::vector<cplx> out(phi_x.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    cplx q = phi_z.values[k] / phi_x.values[k];
    if (rescale)
      q /= q0;
    out[k] = integer_power(q, N);
  }
  if (rescale)
    out[c] = { 1.0, 0.0 };
  return FourierEstimate(phi_x.grid, std::move(out));
}

namespace {

NpfdResult finish(const PowerSelection& sel,
                  const NpfdConfig& config,
                  double epsilon,
                  TransformConstants constants,
                  std::vector<double> ygrid)
{
  NpfdResult res;
  res.N = sel.N;
  res.gamma = sel.gamma;
  res.R = sel.R;
  res.constants = constants;
  res.ygrid = std::move(ygrid);

  // The inversion runs on a fresh grid of K points spanning exactly [-gamma, gamma].
  const TGrid grid(config.K, sel.gamma);
  const FourierEstimate fx = sel.sources.x.on(grid);
  const FourierEstimate fz = sel.sources.z.on(grid);
  cplx raw0;
  FourierEstimate q = powered_quotient(fx, fz, sel.N, config.rescale_at_zero, &raw0);
  InversionResult inv = mc_inverse(q, grid.center(), res.ygrid, config.norm);

  res.density = std::move(inv.density);
  if (config.clip_negative)
    for (double& v : res.density)
      v = std::max(0.0, v);

  auto& d = res.diagnostics;
  d.phi_at_zero = raw0;
  d.max_imaginary = inv.max_imaginary;
  d.hit_n_max = sel.hit_n_max;
  d.empirical_ft = sel.sources.empirical;
  d.epsilon = epsilon;
  d.delta = sel.delta;
  d.scan_t_max = sel.t_max;
  d.doublings = sel.doublings;
  if (sel.hit_n_max)
    d.warnings.push_back("no power up to n_max met the threshold; using n_max");
  if (std::abs(raw0 - 1.0) >= 0.1)
    d.warnings.push_back("transform quotient at zero deviates from 1 by " +
                         std::to_string(std::abs(raw0 - 1.0)) + " before rescaling");
  for (double v : res.density)
    if (!std::isfinite(v))
      throw FitFailureError("deconvolution produced non-finite density values", {});
  res.quotient = std::move(q);
  return res;
}

} // namespace

NpfdResult npfd_deconvolve(const Sample& x, const Sample& z, const NpfdConfig& config)
{
  config.validate();
  check_variance_order(x, z);
  const double eps = resolve_epsilon(config, x.size(), z.size());
  TransformConstants constants;
  PowerSelection sel = select_power(
    [&](int N) {
      auto tr = transform_inputs(x, z, N);
      constants = tr.constants;
      return make_ft_sources(tr.x, tr.z, config);
    },
    eps,
    config);
  constants = transform_inputs(x, z, sel.N).constants;
  auto ygrid = linspace(z.min() - x.max(), z.max() - x.min(), config.n_y);
  return finish(sel, config, eps, constants, std::move(ygrid));
}

NpfdResult npfd_known_error(const Sample& z, const DistributionSpec& error, const NpfdConfig& config)
{
  config.validate();
  error.validate();
  if (!has_closed_form_cf(error))
    throw UnsupportedFamilyError("error distribution " + family_name(error.family) +
                                 " has no closed-form characteristic function");
  const double mu_x = mean(error);
  const double sd_x = std::sqrt(variance(error));
  if (!(z.variance() > variance(error)))
    throw VarianceOrderError("variance order violated: Var(z) = " + std::to_string(z.variance()) +
                             " must exceed the error variance " + std::to_string(variance(error)));

  const double eps = resolve_epsilon(config, z.size(), z.size());
  const bool empirical = uses_empirical_ft(config, z.size(), z.size());

  auto constants_for = [&](int N) {
    const double Nd = static_cast<double>(N);
    TransformConstants c;
    c.a = 1.0 / std::sqrt(Nd);
    c.b_x = (1.0 / Nd - c.a) * mu_x;
    c.b_z = (1.0 / Nd - c.a) * z.mean();
    c.b_y = c.b_z - c.b_x;
    return c;
  };

  PowerSelection sel = select_power(
    [&](int N) {
      const TransformConstants c = constants_for(N);
      std::vector<double> zt(z.values());
      if (N > 1)
        for (double& v : zt)
          v = c.a * v + c.b_z;
      Sample z_t(std::move(zt));

      FourierSourcePair pair;
      pair.empirical = empirical;
      auto err = std::make_shared<const DistributionSpec>(error);
      pair.x = { [err, c](double t) {
        return std::exp(cplx(0.0, c.b_x * t)) * cf(*err, c.a * t);
      } };
      if (empirical)
        pair.z = empirical_source(z_t);
      else
        pair.z = spline_source(z_t, config.df, config.anchor, z_t.min(), z_t.max(), config.ell);
      return pair;
    },
    eps,
    config);

  auto ygrid = linspace(z.min() - (mu_x + 4.0 * sd_x), z.max() - (mu_x - 4.0 * sd_x), config.n_y);
  return finish(sel, config, eps, constants_for(sel.N), std::move(ygrid));
}

Sample replicates_to_error_sample(const std::vector<double>& z1, const std::vector<double>& z2)
{
  if (z1.size() != z2.size())
    throw LengthMismatchError("replicate columns differ in length (" + std::to_string(z1.size()) +
                              " vs " + std::to_string(z2.size()) + ")");
  std::vector<double> out(z1.size());
  for (std::size_t j = 0; j < z1.size(); ++j)
    out[j] = (z1[j] - z2[j]) / std::sqrt(2.0);
  return Sample(std::move(out));
}

NpfdResult npfd_replicates(const ReplicateSample& replicates, const NpfdConfig& config)
{
  Sample x = replicates_to_error_sample(replicates.first().values(), replicates.second().values());
  return npfd_deconvolve(x, replicates.pooled(), config);
}

} // namespace deconvkit
