#include "deconvkit/errors.hpp"
#include "deconvkit/serialization.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace deconvkit;
using D = DistributionSpec;

namespace {

CsvTable parse(const std::string& text)
{
  std::istringstream in(text);
  return read_csv(in);
}

std::size_t parse_error_line(const std::string& text)
{
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

} // namespace

TEST_SUITE("serialization")
{
  TEST_CASE("distributions round trip through JSON")
  {
    const std::vector<D> specs = {
      D::normal(0.5, 2.0),
      D::laplace(-1.0, 0.3),
      D::exponential(0.25),
      D::gamma(4, 1),
      D::chi_square(3),
      D::scaled_chi_square(3, 2),
      D::laplace_kfold(6),
      D::mixture({ 0.3, 0.7 }, { D::normal(-2, 1), D::gamma(2, 1) }),
      D::convolution(D::gamma(4, 1), D::normal(0, 1)),
    };
    for (const auto& s : specs) {
      const json j = distribution_to_json(s);
      CAPTURE(j.dump());
      const D back = distribution_from_json(parse_json(j.dump()));
      CHECK(distribution_to_json(back) == j);
      CHECK(back.family == s.family);
      for (double y : { -1.5, 0.2, 3.0 })
        CHECK(pdf(back, y) == pdf(s, y));
    }

    const json g = distribution_to_json(D::gamma(4, 1));
    CHECK(g.at("family") == "Gamma");
    CHECK(g.at("params").at("shape") == 4.0);
    CHECK(g.at("params").at("rate") == 1.0);
    CHECK(distribution_to_json(D::laplace_kfold(3)).at("params").at("k").is_number_integer());
  }

  TEST_CASE("malformed distribution JSON")
  {
    CHECK_THROWS_AS(distribution_from_json(json::array()), ParseError);
    CHECK_THROWS_AS(distribution_from_json(parse_json(R"({"family": "Cauchy"})")), ParseError);
    CHECK_THROWS_AS(distribution_from_json(parse_json(R"({"family": "Normal", "params": {"mean": 0}})")), ParseError);
    CHECK_THROWS_AS(distribution_from_json(parse_json(R"({"family": "Normal", "params": {"mean": 0, "sd": "1"}})")),
                    ParseError);
    CHECK_THROWS_AS(distribution_from_json(parse_json(R"({"family": "Normal", "params": {"mean": 0, "sd": -1}})")),
                    ParameterError);
    CHECK_THROWS_AS(distribution_from_json(parse_json(R"({"family": "LaplaceKFold", "params": {"k": 2.5}})")),
                    ParameterError);
    CHECK_THROWS_AS(distribution_from_json(parse_json(R"({"family": "Mixture", "params": {"components": []}})")),
                    ParseError);
    CHECK_THROWS_AS(parse_json("{\"family\": "), ParseError);
  }

  TEST_CASE("NPFD configuration")
  {
    NpfdConfig c;
    c.epsilon = 0.02;
    c.df_x = 3;
    c.n_max = 12;
    c.anchor = KnotAnchor::Median;
    c.norm = InversionNorm::Riemann;
    c.force_n = 2;
    const json j = npfd_config_to_json(c);
    NpfdConfig back;
    apply_npfd_config(parse_json(j.dump()), back);
    CHECK(npfd_config_to_json(back) == j);

    NpfdConfig partial;
    apply_npfd_config(parse_json(R"({"K": 201})"), partial);
    CHECK(partial.K == 201);
    CHECK(partial.n_max == NpfdConfig{}.n_max);
    CHECK_FALSE(partial.epsilon);

    NpfdConfig cleared = c;
    apply_npfd_config(parse_json(R"({"epsilon": null})"), cleared);
    CHECK_FALSE(cleared.epsilon);

    NpfdConfig bad;
    CHECK_THROWS_AS(apply_npfd_config(parse_json(R"({"anchor": "mean"})"), bad), ParseError);
    CHECK_THROWS_AS(apply_npfd_config(parse_json(R"({"n_max": "many"})"), bad), ParseError);
    CHECK_THROWS_AS(apply_npfd_config(parse_json(R"({"K": 400})"), bad), Error);
    CHECK_THROWS_AS(apply_npfd_config(json::array(), bad), ParseError);
  }

  TEST_CASE("scenarios round trip through JSON")
  {
    for (const char* id : { "fdd-1", "mcd-5", "dkm-2", "rmd-1", "het-3" }) {
      CAPTURE(id);
      const ScenarioSpec& s = find_scenario(id);
      const json j = scenario_to_json(s);
      const ScenarioSpec back = scenario_from_json(parse_json(j.dump()));
      CHECK(scenario_to_json(back) == j);
      CHECK(back.baseline == s.baseline);
      CHECK(back.error_scales == s.error_scales);
    }

    const ScenarioSpec minimal = scenario_from_json(parse_json(R"({
      "id": "mine",
      "kind": "known-error",
      "target": {"family": "Gamma", "params": {"shape": 4, "rate": 1}},
      "convolving": {"family": "Normal", "params": {"mean": 0, "sd": 1}},
      "baseline": "DKM"
    })"));
    CHECK(minimal.kind == ScenarioKind::KnownError);
    CHECK(minimal.npfd.use_empirical_ft);
    CHECK(minimal.n_x == 500);
    CHECK(minimal.n_z == 500);
    REQUIRE(minimal.baseline_config.error);
    CHECK(minimal.baseline_config.error->family == Family::Normal);

    CHECK_THROWS_AS(scenario_from_json(parse_json(R"({"id": "x"})")), ParseError);
    CHECK_THROWS_AS(scenario_from_json(parse_json(R"({
      "id": "x",
      "target": {"family": "Normal", "params": {"mean": 0, "sd": 1}},
      "convolving": {"family": "Normal", "params": {"mean": 0, "sd": 1}},
      "baseline": "KDE"
    })")),
                    ParseError);
  }

  TEST_CASE("writers")
  {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(density_to_csv({ 0.0, 0.5 }, { 1.0, 0.25 }) == "y,fhat\n0,1\n0.5,0.25\n");
    CHECK_THROWS_AS(density_to_csv({ 0.0 }, { 1.0, 2.0 }), LengthMismatchError);

    ReplicateCurves c;
    c.ygrid = { 0.0, 1.0 };
    c.truth = { 0.5, 0.25 };
    c.npfd = { 0.4, 0.3 };
    CHECK(curves_to_csv(c, "FDD") == "y,truth,NPFD\n0,0.5,0.4\n1,0.25,0.3\n");
    c.baseline = { 0.1, 0.2 };
    CHECK(curves_to_csv(c, "FDD") == "y,truth,NPFD,FDD\n0,0.5,0.4,0.1\n1,0.25,0.3,0.2\n");

    const CsvTable back = parse(density_to_csv({ -1.25, 3.5 }, { 1e-9, 0.75 }));
    CHECK(back.column("y") == std::vector<double>{ -1.25, 3.5 });
    CHECK(back.column("fhat") == std::vector<double>{ 1e-9, 0.75 });
  }

  TEST_CASE("csv reader accepts ragged columns")
  {
    const CsvTable t = parse("x,z\n1,10\n2,20\n,30\n,40\n");
    CHECK(t.header == std::vector<std::string>{ "x", "z" });
    CHECK(t.column("x") == std::vector<double>{ 1, 2 });
    CHECK(t.column("z") == std::vector<double>{ 10, 20, 30, 40 });

    const CsvTable short_rows = parse("x,z\n1,2\n3\n");
    CHECK(short_rows.column("x") == std::vector<double>{ 1, 3 });
    CHECK(short_rows.column("z") == std::vector<double>{ 2 });

    CHECK(t.has("z"));
    CHECK_FALSE(t.has("y"));
    CHECK_THROWS_AS(t.column("y"), ParseError);
  }

  TEST_CASE("csv reader tolerates BOM, blanks, whitespace and signs")
  {
    const CsvTable t = parse("\xEF\xBB\xBFx , z\r\n\r\n 1.5 , -2e-3\r\n\n+4,5\r\n");
    CHECK(t.header == std::vector<std::string>{ "x", "z" });
    CHECK(t.column("x") == std::vector<double>{ 1.5, 4 });
    CHECK(t.column("z") == std::vector<double>{ -2e-3, 5 });

    const CsvTable leading = parse("\n\nx\n1\n");
    CHECK(leading.column("x") == std::vector<double>{ 1 });
  }

  TEST_CASE("csv reader rejects malformed input with line numbers")
  {
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("\n  \n"), ParseError);
    CHECK(parse_error_line("x,,z\n1,2,3\n") == 1);
    CHECK(parse_error_line("x,z\n1,2\n,3\n4,5\n") == 4);
    CHECK(parse_error_line("x,z\n1,2\n3,4,5\n") == 3);
    CHECK(parse_error_line("x\n1\n\nabc\n") == 4);
    CHECK(parse_error_line("x\n1\nnan\n") == 3);
    CHECK(parse_error_line("x\ninf\n") == 2);
    CHECK(parse_error_line("x\n1e999\n") == 2);
    CHECK(parse_error_line("x\n1.5kg\n") == 2);

    try {
      parse("x,z\n1,2\n,3\n4,5\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      const std::string what = e.what();
      CHECK(what.find("missing value") != std::string::npos);
      CHECK(what.find("'x'") != std::string::npos);
      CHECK(what.find("line 4") != std::string::npos);
    }

    CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), ParseError);
  }
}
