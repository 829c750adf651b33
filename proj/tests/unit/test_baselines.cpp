#include "deconvkit/baselines.hpp"
#include "deconvkit/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace deconvkit;
using D = DistributionSpec;

namespace {

double ise_on_grid(const std::vector<double>& y, const std::vector<double>& f, const std::function<double(double)>& truth)
{
  std::vector<double> sq(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = f[i] - truth(y[i]);
    sq[i] = d * d;
  }
  return oracle::trapezoid(y, sq);
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> grid(double lo, double hi, std::size_t n)
{
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

Sample contaminate(const Sample& y, const D& error, std::uint64_t seed)
{
  Sampler s(seed);
  std::vector<double> z(y.values());
  for (double& v : z)
    v += s.draw(error);
  return Sample(z);
}

} // namespace

TEST_SUITE("baselines")
{
  TEST_CASE("damping and kernel transforms")
  {
    CHECK(bartlett_damping(0.0, 2.0) == 1.0);
    CHECK(bartlett_damping(1.0, 2.0) == 0.5);
    CHECK(bartlett_damping(-1.0, 2.0) == 0.5);
    CHECK(bartlett_damping(2.0, 2.0) == 0.0);
    CHECK(bartlett_damping(-7.0, 2.0) == 0.0);

    CHECK(kernel_ft(SmoothingKernel::SincTruncated, 0.99) == 1.0);
    CHECK(kernel_ft(SmoothingKernel::SincTruncated, 1.01) == 0.0);
    CHECK(kernel_ft(SmoothingKernel::QuarticFT, 0.0) == 1.0);
    CHECK(kernel_ft(SmoothingKernel::QuarticFT, 0.5) == doctest::Approx(0.421875));
    CHECK(kernel_ft(SmoothingKernel::QuarticFT, -0.5) == doctest::Approx(0.421875));
    CHECK(kernel_ft(SmoothingKernel::QuarticFT, 1.5) == 0.0);
  }

  TEST_CASE("configuration validation")
  {
    BaselineConfig c;
    c.bandwidth = 0.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.damping = -1.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.ridge = -0.1;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.K = 800;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.method = BaselineMethod::DKM;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    CHECK(method_name(BaselineMethod::RMD) == "RMD");
  }

  TEST_CASE("damping cut-off follows the log-log slope")
  {
    // |phi| = 1 / (1 + t^2) for the standard Laplace; fit region |phi| in [n^-1/2, 0.5]
    const std::size_t n = 20000;
    const double t_hi = std::sqrt(std::sqrt(static_cast<double>(n)) - 1.0);
    std::vector<double> lt, lp;
    for (double t = 1.0; t <= t_hi; t += 0.001) {
      lt.push_back(std::log(t));
      lp.push_back(std::log(1.0 / (1.0 + t * t)));
    }
    const double mt = oracle::mean(lt), mp = oracle::mean(lp);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
      sxy += (lt[i] - mt) * (lp[i] - mp);
      sxx += (lt[i] - mt) * (lt[i] - mt);
    }
    const double expected = std::abs(sxy / sxx) / std::sqrt(2.0);
    CHECK(fdd_damping_cutoff(sample(D::laplace(0, 1), n, 3)) == doctest::Approx(expected).epsilon(0.1));

    CHECK_THROWS_AS(fdd_damping_cutoff(Sample(std::vector<double>(30, 1.0))), DampingFitError);
  }

  TEST_CASE("vanishing damping width gives a flagged zero estimate")
  {
    const Sample x = sample(D::normal(0, 1), 100, 1);
    const Sample z = sample(D::normal(0, 2), 100, 2);
    BaselineConfig c;
    c.damping = 1e-12;
    const auto res = fdd_deconvolve(x, z, grid(-5, 5, 50), c);
    for (double d : res.density)
      CHECK(d == 0.0);
    CHECK_FALSE(res.warnings.empty());
  }

  TEST_CASE("point-mass error reproduces a kernel estimate of z")
  {
    const Sample x(std::vector<double>(1000, 0.0));
    const Sample z = sample(D::gamma(4, 1), 1000, 9);
    const auto y = grid(-2, 16, 400);
    auto truth = [](double v) { return oracle::gamma_pdf(v, 4, 1); };

    BaselineConfig fdd;
    fdd.damping = 4.0;
    const auto f = fdd_deconvolve(x, z, y, fdd);
    CHECK(ise_on_grid(y, f.density, truth) < 0.05);

    const auto m = mcd_deconvolve(x, z, y);
    CHECK(ise_on_grid(y, m.density, truth) < 0.05);
  }

  TEST_CASE("MCD indicator drops frequencies under the noise floor")
  {
    // |phi_x(t)| = |cos(t)| for half the points at -1 and half at +1; n_x = 100 gives cutoff 0.1
    std::vector<double> xv;
    for (int i = 0; i < 50; ++i) {
      xv.push_back(-1.0);
      xv.push_back(1.0);
    }
    const Sample x(xv);
    const Sample z = sample(D::normal(0, 1.5), 400, 4);
    BaselineConfig c;
    c.bandwidth = 0.2;
    const auto y = grid(-4, 4, 41);
    const auto res = mcd_deconvolve(x, z, y, c);

    // direct quadrature of the same integral
    std::vector<double> expected;
    for (double v : y) {
      const int n = 200000;
      const double T = 1.0 / 0.2;
      double s = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double t = -T + 2.0 * T * k / n;
        const double px = std::cos(t);
        if (std::abs(px) < 0.1)
          continue;
        cplx pz = 0.0;
        for (double w : z)
          pz += cplx(std::cos(t * w), std::sin(t * w));
        pz /= static_cast<double>(z.size());
        const double kt = std::pow(1.0 - (t * 0.2) * (t * 0.2), 3);
        const double wgt = (k == 0 || k == n) ? 0.5 : 1.0;
        s += wgt * (kt * pz / px * cplx(std::cos(t * v), -std::sin(t * v))).real();
      }
      expected.push_back(s * (2.0 * T / n) / (2.0 * std::numbers::pi));
      if (expected.size() == 3)
        break;
    }
    for (std::size_t i = 0; i < expected.size(); ++i)
      CHECK(res.density[i] == doctest::Approx(expected[i]).epsilon(0.02));
    for (double d : res.density)
      CHECK(std::isfinite(d));
  }

  TEST_CASE("MCD with a huge bandwidth flattens out")
  {
    const Sample x = sample(D::normal(0, 1), 200, 1);
    const Sample z = sample(D::normal(0, 2), 200, 2);
    BaselineConfig c;
    c.bandwidth = 100.0;
    const auto res = mcd_deconvolve(x, z, grid(-10, 10, 101), c);
    for (double d : res.density)
      CHECK(std::abs(d) <= 1.0 / (100.0 * std::numbers::pi) + 1e-9);
  }

  TEST_CASE("default MCD bandwidth")
  {
    // |phi_z| = exp(-t^2 / 2) crosses 1/sqrt(400) at t = sqrt(2 ln 20)
    const Sample z = sample(D::normal(0, 1), 400, 6);
    CHECK(mcd_default_bandwidth(z) == doctest::Approx(1.0 / std::sqrt(2.0 * std::log(20.0))).epsilon(0.15));
  }

  TEST_CASE("rule-of-thumb bandwidth")
  {
    const Sample z({ -2.0, -1.0, 0.0, 1.0, 2.0, 3.0 });
    const double s = std::sqrt(oracle::variance(z.values()));
    const double base = 1.06 * s * std::pow(6.0, -0.2);
    CHECK(rule_of_thumb_bandwidth(z, 0.0) == doctest::Approx(base));
    CHECK(rule_of_thumb_bandwidth(z, 0.5 * s * s) == doctest::Approx(1.5 * base));
    CHECK(rule_of_thumb_bandwidth(z, 10.0 * s * s) == doctest::Approx(2.0 * base));
    CHECK_THROWS_AS(rule_of_thumb_bandwidth(Sample({ 1.0, 1.0 }), 0.1), InsufficientDataError);
  }

  TEST_CASE("DKM with a vanishing Laplace error is an ordinary kernel estimate")
  {
    const Sample z = sample(D::normal(0, 1), 1000, 12);
    const auto y = grid(-5, 5, 201);
    BaselineConfig c;
    c.bandwidth = 0.15;
    const auto dkm = dkm_deconvolve(z, D::laplace(0, 1e-6), y, c);

    BaselineConfig m;
    m.bandwidth = 0.15;
    const auto kde = mcd_deconvolve(Sample(std::vector<double>(50, 0.0)), z, y, m);
    CHECK(sup_diff(dkm.density, kde.density) < 1e-6);
    CHECK(ise_on_grid(y, dkm.density, [](double v) { return oracle::normal_pdf(v); }) < 0.01);
  }

  TEST_CASE("DKM integrates to about one after clipping")
  {
    const Sample z = contaminate(sample(D::normal(0, 1), 500, 1), D::laplace(0, 0.5), 2);
    const auto y = grid(-8, 8, 801);
    const auto res = dkm_deconvolve(z, D::laplace(0, 0.5), y);
    std::vector<double> clipped;
    for (double d : res.density)
      clipped.push_back(std::max(0.0, d));
    CHECK(oracle::trapezoid(y, clipped) == doctest::Approx(1.0).epsilon(0.05));

    const Sample zn = contaminate(sample(D::normal(0, 1), 500, 3), D::normal(0, 0.5), 4);
    const auto rn = dkm_deconvolve(zn, D::normal(0, 0.5), y);
    clipped.clear();
    for (double d : rn.density)
      clipped.push_back(std::max(0.0, d));
    CHECK(oracle::trapezoid(y, clipped) == doctest::Approx(1.0).epsilon(0.05));

    CHECK_THROWS_AS(dkm_deconvolve(z, D::gamma(2, 1), y), UnsupportedFamilyError);
  }

  TEST_CASE("RMD error transform")
  {
    Sampler s(3);
    std::vector<double> a(200), b(200);
    for (std::size_t j = 0; j < 200; ++j) {
      const double y = s.draw(D::gamma(4, 1));
      a[j] = y + s.draw(D::normal(0, 1));
      b[j] = y + s.draw(D::normal(0, 1));
    }
    const ReplicateSample r(a, b);
    for (double t = 0.0; t < 20.0; t += 0.1) {
      const double v = rmd_error_ft(r, t);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const ReplicateSample same(a, a);
    for (double t : { 0.0, 0.5, 3.0, 40.0 })
      CHECK(rmd_error_ft(same, t) == 1.0);

    CHECK_THROWS_AS(ReplicateSample({ 1.0, 2.0 }, { 1.0 }), LengthMismatchError);
    CHECK_THROWS_AS(rmd_deconvolve(ReplicateSample(std::vector<double>(a.begin(), a.begin() + 10),
                                                   std::vector<double>(b.begin(), b.begin() + 10)),
                                   grid(0, 1, 10)),
                    InsufficientDataError);
  }

  TEST_CASE("RMD with identical replicates is a kernel estimate of the pooled sample")
  {
    const Sample y = sample(D::gamma(4, 1), 300, 5);
    const ReplicateSample r(y.values(), y.values());
    const auto yg = grid(-2, 16, 181);
    BaselineConfig c;
    c.bandwidth = 0.6;
    const auto rmd = rmd_deconvolve(r, yg, c);
    const auto kde = mcd_deconvolve(Sample(std::vector<double>(50, 0.0)), r.pooled(), yg, c);
    CHECK(sup_diff(rmd.density, kde.density) < 1e-12);
  }

  TEST_CASE("RMD ridge has little effect on a well-conditioned transform")
  {
    Sampler s(8);
    std::vector<double> a(500), b(500);
    for (std::size_t j = 0; j < 500; ++j) {
      const double y = s.draw(D::normal(0, 1));
      a[j] = y + s.draw(D::normal(0, 0.3));
      b[j] = y + s.draw(D::normal(0, 0.3));
    }
    const ReplicateSample r(a, b);
    BaselineConfig c0;
    const auto yg = grid(-5, 5, 201);
    const auto r0 = rmd_deconvolve(r, yg, c0);
    double lowest = 1.0;
    for (double t = 0.0; t <= r0.t_limit; t += 0.01)
      lowest = std::min(lowest, rmd_error_ft(r, t));
    REQUIRE(lowest > 0.2);
    BaselineConfig c1;
    c1.ridge = 0.01;
    const auto r1 = rmd_deconvolve(r, yg, c1);
    CHECK(sup_diff(r0.density, r1.density) < 0.05);
  }

  TEST_CASE("all methods return finite output")
  {
    const Sample yv = sample(D::chi_square(3), 300, 1);
    const Sample x = sample(D::normal(0, 1), 300, 2);
    const Sample z = contaminate(yv, D::normal(0, 1), 3);
    const auto y = grid(-6, 20, 300);
    std::vector<std::vector<double>> outs = {
      fdd_deconvolve(x, z, y).density,
      mcd_deconvolve(x, z, y).density,
      dkm_deconvolve(z, D::normal(0, 1), y).density,
    };
    Sampler s(4);
    std::vector<double> a(300), b(300);
    for (std::size_t j = 0; j < 300; ++j) {
      a[j] = yv[j] + s.draw(D::normal(0, 1));
      b[j] = yv[j] + s.draw(D::normal(0, 1));
    }
    outs.push_back(rmd_deconvolve(ReplicateSample(a, b), y).density);
    for (const auto& o : outs) {
      REQUIRE(o.size() == y.size());
      for (double d : o)
        CHECK(std::isfinite(d));
    }
  }
}
