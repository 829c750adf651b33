#include "deconvkit/cli.hpp"
#include "deconvkit/errors.hpp"
#include "deconvkit/serialization.hpp"
#include "deconvkit/simbench.hpp"
#include "deconvkit/svg.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace deconvkit {

namespace {

namespace fs = std::filesystem;

struct NpfdOverrides
{
  std::optional<double> epsilon;
  std::optional<int> n_max;
  std::optional<int> df;
  bool empirical_ft = false;
  bool clip_negative = false;
  std::string config_file;

  void add_to(CLI::App& cmd)
  {
    cmd.add_option("--epsilon", epsilon, "Threshold for the power selection")->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--n-max", n_max, "Largest power considered")->check(CLI::PositiveNumber);
    cmd.add_option("--df", df, "Spline degrees of freedom")->check(CLI::Range(3, 50));
    cmd.add_flag("--empirical-ft", empirical_ft, "Use empirical Fourier transforms");
    cmd.add_flag("--clip-negative", clip_negative, "Set negative density values to zero");
    cmd.add_option("--config", config_file, "JSON file with NPFD settings");
  }

  /// Flags win over the config file, which wins over `base`.
  NpfdConfig apply(NpfdConfig base) const
  {
    if (!config_file.empty())
      apply_npfd_config(parse_json(read_text(config_file)), base);
    if (epsilon)
      base.epsilon = *epsilon;
    if (n_max)
      base.n_max = *n_max;
    if (df)
      base.df = *df;
    if (empirical_ft)
      base.use_empirical_ft = true;
    if (clip_negative)
      base.clip_negative = true;
    base.validate();
    return base;
  }

  static std::string read_text(const std::string& path)
  {
    std::ifstream in(path);
    if (!in)
      throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

void write_file(const fs::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write '" + path.string() + "'");
  out << text;
}

fs::path prepare_dir(const std::string& dir)
{
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec)
    throw Error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

unsigned resolve_threads(std::optional<unsigned> flag)
{
  if (flag)
    return std::max(1u, *flag);
  if (const char* env = std::getenv("DECONVKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0)
      return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// --- deconvolve ---------------------------------------------------------

struct DeconvolveArgs
{
  std::string input;
  std::string error_dist;
  std::string out = ".";
  bool plot = false;
  NpfdOverrides npfd;
};

int cmd_deconvolve(const DeconvolveArgs& a, std::ostream& out)
{
  const CsvTable table = read_csv_file(a.input);
  const NpfdConfig config = a.npfd.apply({});
  NpfdResult result;
  std::string mode;

  if (!a.error_dist.empty()) {
    const std::string text = a.error_dist.front() == '{' ? a.error_dist : NpfdOverrides::read_text(a.error_dist);
    const DistributionSpec error = distribution_from_json(parse_json(text));
    result = npfd_known_error(Sample(table.column("z")), error, config);
    mode = "known error";
  } else if (table.has("z1") && table.has("z2")) {
    result = npfd_replicates(ReplicateSample(table.column("z1"), table.column("z2")), config);
    mode = "replicates";
  } else if (table.has("x") && table.has("z")) {
    result = npfd_deconvolve(Sample(table.column("x")), Sample(table.column("z")), config);
    mode = "two samples";
  } else {
    throw ParseError("input needs columns x,z or z1,z2, or z with --error-dist");
  }

  const fs::path dir = prepare_dir(a.out);
  write_file(dir / "result.json", npfd_result_to_json(result).dump(2) + "\n");
  write_file(dir / "density.csv", density_to_csv(result.ygrid, result.density));
  if (a.plot) {
    write_file(dir / "density.svg",
               svg_line_plot({ { "NPFD", result.ygrid, result.density } },
                             "NPFD estimate, N = " + std::to_string(result.N)));
    if (result.quotient) {
      const auto& q = *result.quotient;
      Curve c{ "|quotient|^N", q.grid.values(), {} };
      for (const auto& v : q.values)
        c.y.push_back(std::abs(v));
      write_file(dir / "fourier.svg", svg_line_plot({ c }, "Powered Fourier quotient", "t", "modulus"));
    }
  }
  out << "NPFD (" << mode << "): N = " << result.N << ", gamma = " << format_number(result.gamma)
      << ", R = " << result.R << "\n";
  for (const auto& w : result.diagnostics.warnings)
    out << "warning: " << w << "\n";
  out << "wrote " << (dir / "result.json").string() << "\n";
  return exit_code::ok;
}

// --- simulate -----------------------------------------------------------

struct SimulateArgs
{
  std::string scenario;
  std::string scenario_file;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out = ".";
  bool plot = false;
  bool list = false;
  NpfdOverrides npfd;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err)
{
  if (a.list) {
    for (const auto& s : builtin_scenarios())
      out << s.id << "  " << s.description << "\n";
    return exit_code::ok;
  }
  if (a.reps && *a.reps == 0) {
    err << "--reps must be at least 1\n";
    return exit_code::usage;
  }
  ScenarioSpec spec;
  if (!a.scenario_file.empty()) {
    spec = scenario_from_json(parse_json(NpfdOverrides::read_text(a.scenario_file)));
  } else if (!a.scenario.empty()) {
    bool found = false;
    for (const auto& s : builtin_scenarios())
      if (s.id == a.scenario) {
        spec = s;
        found = true;
      }
    if (!found) {
      err << "unknown scenario '" << a.scenario << "' (see --list)\n";
      return exit_code::unknown_scenario;
    }
  } else {
    err << "simulate needs --scenario, --scenario-file or --list\n";
    return exit_code::usage;
  }
  if (a.reps)
    spec.replicates = *a.reps;
  if (a.seed)
    spec.seed = *a.seed;
  spec.npfd = a.npfd.apply(spec.npfd);

  const ScenarioRun run = run_scenario(spec, resolve_threads(a.threads));
  const SummaryTable& t = run.table;
  const std::string base = t.methods.size() > 1 ? t.methods[1].method : std::string();

  const fs::path dir = prepare_dir(a.out);
  json doc = summary_to_json(t);
  doc["spec"] = scenario_to_json(spec);
  write_file(dir / (spec.id + "_summary.json"), doc.dump(2) + "\n");
  write_file(dir / (spec.id + "_summary.csv"), summary_to_csv(t));
  write_file(dir / (spec.id + "_replicates.csv"), replicates_to_csv(t));
  write_file(dir / (spec.id + "_representative.csv"), curves_to_csv(run.representative, base));
  if (a.plot) {
    const auto& c = run.representative;
    std::vector<Curve> curves = { { "true density", c.ygrid, c.truth }, { "NPFD", c.ygrid, c.npfd } };
    if (!c.baseline.empty())
      curves.push_back({ base, c.ygrid, c.baseline });
    write_file(dir / (spec.id + "_representative.svg"),
               svg_line_plot(curves, spec.id + " representative replicate (N = " + std::to_string(c.N) + ")"));
    std::vector<std::pair<std::string, BoxData>> boxes;
    for (const auto& m : t.methods)
      boxes.emplace_back(m.method, m.box);
    write_file(dir / (spec.id + "_boxplot.svg"), svg_box_plot(boxes, spec.id + ": 10 x ISE"));
  }

  out << spec.id << " (" << t.replicates << " replicates)\n";
  for (const auto& m : t.methods)
    out << "  " << m.method << ": median " << format_number(m.stats.median) << " [" << format_number(m.stats.q1)
        << ", " << format_number(m.stats.q3) << "]" << (m.failures ? ", failures " + std::to_string(m.failures) : "")
        << "\n";
  out << "  representative replicate " << t.representative << ", N = " << t.N[t.representative] << "\n";
  return exit_code::ok;
}

// --- plot ---------------------------------------------------------------

struct PlotArgs
{
  std::string input;
  std::string compare;
  std::string out = ".";
  std::string name = "plot.svg";
};

std::vector<Curve> curves_from(const std::string& path, std::vector<std::pair<std::string, BoxData>>* boxes)
{
  if (!fs::exists(path))
    throw ParseError("input '" + path + "' does not exist");
  if (fs::path(path).extension() == ".csv") {
    const CsvTable t = read_csv_file(path);
    if (t.header.size() < 2)
      throw ParseError("plot CSV needs a grid column and at least one curve");
    std::vector<Curve> out;
    for (std::size_t c = 1; c < t.header.size(); ++c) {
      Curve curve{ t.header[c], t.columns[0], t.columns[c] };
      curve.x.resize(std::min(curve.x.size(), curve.y.size()));
      curve.y.resize(curve.x.size());
      out.push_back(std::move(curve));
    }
    return out;
  }
  const json j = parse_json(NpfdOverrides::read_text(path));
  try {
    if (j.contains("methods") && boxes) {
      for (const auto& m : j.at("methods")) {
        BoxData b;
        const json& box = m.at("box");
        auto num = [](const json& v) { return v.is_null() ? std::nan("") : v.get<double>(); };
        b.box = { num(box.at("q1")), num(box.at("median")), num(box.at("q3")) };
        b.lower_whisker = num(box.at("lower_whisker"));
        b.upper_whisker = num(box.at("upper_whisker"));
        boxes->emplace_back(m.at("method").get<std::string>(), b);
      }
      return {};
    }
    Curve c{ j.value("method", std::string("density")), {}, {} };
    for (const auto& v : j.at("ygrid"))
      c.x.push_back(v.is_null() ? std::nan("") : v.get<double>());
    for (const auto& v : j.at("density"))
      c.y.push_back(v.is_null() ? std::nan("") : v.get<double>());
    if (c.x.size() != c.y.size())
      throw ParseError("'" + path + "': ygrid and density differ in length");
    return { c };
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is not a deconvkit result: " + e.what());
  }
}

int cmd_plot(const PlotArgs& a, std::ostream& out)
{
  std::vector<std::pair<std::string, BoxData>> boxes;
  std::vector<Curve> curves = curves_from(a.input, &boxes);
  std::string svg;
  if (!boxes.empty()) {
    svg = svg_box_plot(boxes, fs::path(a.input).stem().string());
  } else {
    if (!a.compare.empty()) {
      auto more = curves_from(a.compare, nullptr);
      for (auto& c : more) {
        c.label += " (compare)";
        curves.push_back(std::move(c));
      }
    }
    svg = svg_line_plot(curves, fs::path(a.input).stem().string());
  }
  const fs::path dir = prepare_dir(a.out);
  const fs::path target = dir / fs::path(a.name).filename();
  write_file(target, svg);
  out << "wrote " << target.string() << "\n";
  return exit_code::ok;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Nonparametric density deconvolution (NPFD) with baselines and a simulation benchmark" };
  app.name("deconvkit");
  app.require_subcommand(1);

  DeconvolveArgs dargs;
  auto* dec = app.add_subcommand("deconvolve", "Deconvolve samples from a CSV file");
  dec->add_option("input", dargs.input, "CSV with columns x,z or z1,z2 or z")->required();
  dec->add_option("--error-dist", dargs.error_dist, "Known error distribution as JSON text or a JSON file");
  dec->add_option("--out", dargs.out, "Output directory");
  dec->add_flag("--plot", dargs.plot, "Also write SVG plots");
  dargs.npfd.add_to(*dec);

  SimulateArgs sargs;
  auto* sim = app.add_subcommand("simulate", "Run a simulation scenario");
  sim->add_option("--scenario", sargs.scenario, "Built-in scenario id");
  sim->add_option("--scenario-file", sargs.scenario_file, "Scenario JSON file");
  sim->add_option("--reps", sargs.reps, "Number of replicates");
  sim->add_option("--seed", sargs.seed, "Base seed");
  sim->add_option("--threads", sargs.threads, "Worker threads (default: DECONVKIT_THREADS or all cores)");
  sim->add_option("--out", sargs.out, "Output directory");
  sim->add_flag("--plot", sargs.plot, "Also write SVG plots");
  sim->add_flag("--list", sargs.list, "List the built-in scenarios");
  sargs.npfd.add_to(*sim);

  PlotArgs pargs;
  auto* plt = app.add_subcommand("plot", "Render results as SVG");
  plt->add_option("input", pargs.input, "Result JSON, summary JSON or density CSV")->required();
  plt->add_option("--compare", pargs.compare, "Second result drawn on the same axes");
  plt->add_option("--out", pargs.out, "Output directory");
  plt->add_option("--name", pargs.name, "File name of the SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_code::usage;
  }

  try {
    if (*dec)
      return cmd_deconvolve(dargs, out);
    if (*sim)
      return cmd_simulate(sargs, out, err);
    return cmd_plot(pargs, out);
  } catch (const VarianceOrderError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::variance_order;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::parse;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
}

} // namespace deconvkit
