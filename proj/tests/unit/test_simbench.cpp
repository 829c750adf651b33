#include "deconvkit/errors.hpp"
#include "deconvkit/simbench.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace deconvkit;
using D = DistributionSpec;

namespace {

std::vector<double> grid(double lo, double hi, std::size_t n)
{
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

ScenarioSpec small_copy(const std::string& id, std::size_t reps)
{
  ScenarioSpec s = find_scenario(id);
  s.replicates = reps;
  return s;
}

} // namespace

TEST_SUITE("simbench")
{
  TEST_CASE("integrated squared error")
  {
    const auto y = grid(-10, 10, 2001);
    std::vector<double> exact, zero(y.size(), 0.0);
    for (double v : y)
      exact.push_back(oracle::normal_pdf(v));
    CHECK(ise(y, exact, D::normal(0, 1)) < 1e-12);
    CHECK(ise(y, zero, D::normal(0, 1)) == doctest::Approx(1.0 / (2.0 * std::sqrt(std::numbers::pi))).epsilon(1e-6));

    std::vector<double> one, two;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = 0.05 * std::sin(y[i]) * std::exp(-0.1 * y[i] * y[i]);
      one.push_back(exact[i] + d);
      two.push_back(exact[i] + 2.0 * d);
    }
    CHECK(ise(y, two, D::normal(0, 1)) == doctest::Approx(4.0 * ise(y, one, D::normal(0, 1))).epsilon(1e-9));

    CHECK_THROWS_AS(ise(grid(0, 1, 31), std::vector<double>(31, 0.0), D::normal(0, 1)), GridError);
    auto uneven = grid(0, 1, 40);
    uneven[5] += 0.01;
    CHECK_THROWS_AS(ise(uneven, std::vector<double>(40, 0.0), D::normal(0, 1)), GridError);
    CHECK_THROWS_AS(ise(grid(0, 1, 40), std::vector<double>(39, 0.0), D::normal(0, 1)), LengthMismatchError);
  }

  TEST_CASE("quartiles by the median-of-halves convention")
  {
    const Quartiles single = quartiles({ 0.37 });
    CHECK(single.q1 == 0.37);
    CHECK(single.median == 0.37);
    CHECK(single.q3 == 0.37);

    const Quartiles odd = quartiles({ 9, 1, 8, 2, 7, 3, 6, 4, 5 });
    CHECK(odd.q1 == 2.5);
    CHECK(odd.median == 5.0);
    CHECK(odd.q3 == 7.5);

    const Quartiles even = quartiles({ 1, 2, 3, 4, 5, 6, 7, 8 });
    CHECK(even.q1 == 2.5);
    CHECK(even.median == 4.5);
    CHECK(even.q3 == 6.5);

    CHECK_THROWS_AS(quartiles({}), InsufficientDataError);
  }

  TEST_CASE("box-plot data")
  {
    const BoxData b = box_data({ 1, 2, 3, 4, 5, 6, 7, 8, 100 });
    CHECK(b.box.q1 == 2.5);
    CHECK(b.box.q3 == 7.5);
    CHECK(b.outliers == std::vector<double>{ 100 });
    CHECK(b.lower_whisker == 1.0);
    CHECK(b.upper_whisker == 8.0);
  }

  TEST_CASE("replicate seeds")
  {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 1000; ++r)
      seen.insert(replicate_seed(7, r));
    CHECK(seen.size() == 1000);
    CHECK(replicate_seed(7, 3) == replicate_seed(7, 3));
    CHECK(replicate_seed(7, 3) != replicate_seed(8, 3));
  }

  TEST_CASE("registry contents")
  {
    const auto& all = builtin_scenarios();
    std::set<std::string> ids;
    for (const auto& s : all) {
      CHECK(ids.insert(s.id).second);
      CHECK_NOTHROW(s.validate());
    }
    for (int i = 1; i <= 8; ++i) {
      CHECK(ids.count("fdd-" + std::to_string(i)));
      CHECK(ids.count("fdd-" + std::to_string(i) + "-n100"));
    }
    for (int i = 1; i <= 5; ++i) {
      CHECK(ids.count("mcd-" + std::to_string(i)));
      CHECK(ids.count("mcd-" + std::to_string(i) + "-large"));
    }
    for (int i = 1; i <= 4; ++i) {
      CHECK(ids.count("dkm-" + std::to_string(i)));
      CHECK(ids.count("rmd-" + std::to_string(i)));
    }
    for (int i = 1; i <= 6; ++i)
      CHECK(ids.count("het-" + std::to_string(i)));
    CHECK(all.size() == 40);

    const auto& fdd2 = find_scenario("fdd-2");
    CHECK(fdd2.target.family == Family::Gamma);
    CHECK(fdd2.target.p == std::vector<double>{ 4, 1 });
    CHECK(fdd2.convolving.family == Family::Exponential);
    CHECK(fdd2.convolving.p == std::vector<double>{ 0.25 });
    CHECK(fdd2.npfd.df_x == 3);
    CHECK(find_scenario("fdd-1").npfd.df_x == 3);
    CHECK_FALSE(find_scenario("fdd-3").npfd.df_x);

    const auto& mcd5 = find_scenario("mcd-5");
    CHECK(mcd5.target.family == Family::LaplaceKFold);
    CHECK(mcd5.target.p[0] == 1);
    CHECK(mcd5.convolving.p[0] == 5);
    CHECK(variance(mcd5.target) + variance(mcd5.convolving) == variance(D::laplace_kfold(6)));
    CHECK(mcd5.n_x == 10);
    CHECK(mcd5.n_z == 200);

    const auto& rmd1 = find_scenario("rmd-1");
    CHECK(rmd1.kind == ScenarioKind::Replicated);
    CHECK(rmd1.target.family == Family::ScaledChiSquare);
    CHECK(variance(rmd1.convolving) == doctest::Approx(0.2));
    CHECK(rmd1.npfd.epsilon == 0.1);

    const auto& dkm2 = find_scenario("dkm-2");
    CHECK(dkm2.npfd.n_max == 1);
    CHECK(dkm2.npfd.epsilon == 0.03);

    CHECK(find_scenario("het-1").baseline == std::nullopt);
    CHECK(find_scenario("het-1").error_scales.size() == find_scenario("het-1").n_z);
    CHECK_THROWS_AS(find_scenario("nope"), ParameterError);
  }

  TEST_CASE("scenario validation")
  {
    ScenarioSpec s = find_scenario("fdd-1");
    s.n_x = 5;
    CHECK_THROWS_AS(s.validate(), ParameterError);
    s = find_scenario("rmd-1");
    s.error_scales = { 1.0, 2.0 };
    CHECK_THROWS_AS(s.validate(), LengthMismatchError);
    s = find_scenario("fdd-1");
    s.baseline = BaselineMethod::RMD;
    CHECK_THROWS_AS(s.validate(), ParameterError);

    for (auto k : { ScenarioKind::SampledConvolving, ScenarioKind::KnownError, ScenarioKind::Replicated })
      CHECK(kind_from_name(kind_name(k)) == k);
  }

  TEST_CASE("replicate data follow the scenario kind")
  {
    const auto a = draw_replicate(find_scenario("fdd-1"), 0);
    REQUIRE(a.x);
    REQUIRE(a.z);
    CHECK(a.x->size() == 500);
    CHECK(a.z->variance() > a.x->variance());

    const auto b = draw_replicate(find_scenario("dkm-1"), 0);
    REQUIRE(b.z);
    CHECK_FALSE(b.pairs);

    const auto c = draw_replicate(find_scenario("rmd-1"), 0);
    REQUIRE(c.pairs);
    CHECK(c.pairs->size() == 500);

    const auto again = draw_replicate(find_scenario("fdd-1"), 0);
    CHECK(again.x->values() == a.x->values());
  }

  TEST_CASE("variance-order regeneration is rare for every built-in scenario")
  {
    // Designs whose error variance is close to Var(z), or whose error sample
    // has only ten draws, redraw more often; they must still stay feasible.
    const std::set<std::string> heavy = { "fdd-2", "fdd-2-n100", "mcd-3", "mcd-4", "mcd-5" };
    for (const auto& s : builtin_scenarios()) {
      CAPTURE(s.id);
      std::size_t redraws = 0;
      for (std::size_t r = 0; r < s.replicates; ++r)
        redraws += draw_replicate(s, r).attempts - 1;
      const double rate = static_cast<double>(redraws) / static_cast<double>(s.replicates);
      if (heavy.count(s.id)) {
        MESSAGE(s.id << " redraw rate " << rate);
        CHECK(rate < 0.5);
      } else {
        CHECK(rate < 0.05);
      }
    }
  }

  TEST_CASE("replicate outcome matches its curves")
  {
    const ScenarioSpec s = find_scenario("fdd-3");
    ReplicateOutcome out;
    const ReplicateCurves c = run_replicate(s, 2, &out);
    CHECK(out.error.empty());
    CHECK(c.ygrid.size() == 512);
    CHECK(c.N == out.N);
    for (std::size_t i = 0; i < c.ygrid.size(); i += 37)
      CHECK(c.truth[i] == pdf(s.target, c.ygrid[i]));
    CHECK(out.npfd == doctest::Approx(10.0 * ise(c.ygrid, c.npfd, s.target)).epsilon(1e-12));
    CHECK(out.baseline == doctest::Approx(10.0 * ise(c.ygrid, c.baseline, s.target)).epsilon(1e-12));
    CHECK(out.seed == replicate_seed(s.seed, 2));
  }

  TEST_CASE("a single replicate collapses the quartiles")
  {
    const ScenarioRun run = run_scenario(small_copy("fdd-3", 1));
    const auto& m = run.table.methods.front();
    CHECK(m.method == "NPFD");
    CHECK(m.stats.q1 == m.stats.median);
    CHECK(m.stats.q3 == m.stats.median);
    CHECK(run.table.replicates == 1);
  }

  TEST_CASE("scenario runs are deterministic and thread-count independent")
  {
    const ScenarioSpec s = small_copy("fdd-1", 6);
    const ScenarioRun a = run_scenario(s, 1);
    const ScenarioRun b = run_scenario(s, 3);
    const ScenarioRun c = run_scenario(s, 1);
    for (const auto* other : { &b, &c }) {
      REQUIRE(other->table.methods.size() == a.table.methods.size());
      for (std::size_t m = 0; m < a.table.methods.size(); ++m)
        CHECK(other->table.methods[m].values == a.table.methods[m].values);
      CHECK(other->table.N == a.table.N);
      CHECK(other->table.representative == a.table.representative);
      CHECK(other->representative.npfd == a.representative.npfd);
    }

    const auto& npfd = a.table.methods.front();
    CHECK(npfd.values.size() == 6);
    CHECK(a.table.methods.size() == 2);
    CHECK(a.table.methods[1].method == "FDD");
    for (double v : npfd.values)
      CHECK(v > 0.0);
    CHECK(npfd.stats.q1 <= npfd.stats.median);
    CHECK(npfd.stats.median <= npfd.stats.q3);

    const double gap = std::abs(npfd.values[a.table.representative] - npfd.stats.median);
    for (double v : npfd.values)
      CHECK(gap <= std::abs(v - npfd.stats.median));
  }
}
