#include "deconvkit/serialization.hpp"
#include "deconvkit/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace deconvkit {

namespace {

const std::vector<std::string>& param_names(Family f)
{
  static const std::vector<std::string> normal = { "mean", "sd" };
  static const std::vector<std::string> loc_scale = { "location", "scale" };
  static const std::vector<std::string> rate = { "rate" };
  static const std::vector<std::string> shape_rate = { "shape", "rate" };
  static const std::vector<std::string> shape_scale = { "shape", "scale" };
  static const std::vector<std::string> df = { "df" };
  static const std::vector<std::string> df_div = { "df", "divisor" };
  static const std::vector<std::string> k = { "k" };
  static const std::vector<std::string> none;
  switch (f) {
    case Family::Normal: return normal;
    case Family::Laplace:
    case Family::Gumbel: return loc_scale;
    case Family::Exponential: return rate;
    case Family::Gamma: return shape_rate;
    case Family::Weibull: return shape_scale;
    case Family::ChiSquare: return df;
    case Family::ScaledChiSquare: return df_div;
    case Family::LaplaceKFold: return k;
    default: return none;
  }
}

double number_at(const json& params, const std::string& key, const std::string& family)
{
  if (!params.contains(key))
    throw ParseError(family + " needs parameter '" + key + "'");
  const json& v = params.at(key);
  if (!v.is_number())
    throw ParseError(family + " parameter '" + key + "' must be a number");
  return v.get<double>();
}

json nullable(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json nullable(const std::vector<double>& v)
{
  json a = json::array();
  for (double d : v)
    a.push_back(nullable(d));
  return a;
}

json quartiles_json(const Quartiles& q)
{
  return { { "q1", nullable(q.q1) }, { "median", nullable(q.median) }, { "q3", nullable(q.q3) } };
}

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ','))
    cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

} // namespace

json distribution_to_json(const DistributionSpec& spec)
{
  json params = json::object();
  if (spec.family == Family::Mixture) {
    params["weights"] = spec.weights;
    json comps = json::array();
    for (const auto& c : spec.parts)
      comps.push_back(distribution_to_json(c));
    params["components"] = comps;
  } else if (spec.family == Family::Convolution) {
    json comps = json::array();
    for (const auto& c : spec.parts)
      comps.push_back(distribution_to_json(c));
    params["components"] = comps;
  } else {
    const auto& names = param_names(spec.family);
    for (std::size_t i = 0; i < names.size() && i < spec.p.size(); ++i) {
      if (spec.family == Family::LaplaceKFold)
        params[names[i]] = static_cast<int>(spec.p[i]);
      else
        params[names[i]] = spec.p[i];
    }
  }
  return { { "family", family_name(spec.family) }, { "params", params } };
}

DistributionSpec distribution_from_json(const json& j)
{
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw ParseError("distribution JSON needs a string field 'family'");
  const std::string name = j.at("family").get<std::string>();
  Family family;
  try {
    family = family_from_name(name);
  } catch (const Error&) {
    throw ParseError("unknown distribution family '" + name + "'");
  }
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (!params.is_object())
    throw ParseError("distribution 'params' must be an object");

  auto components = [&]() {
    if (!params.contains("components") || !params.at("components").is_array())
      throw ParseError(name + " needs a 'components' array");
    std::vector<DistributionSpec> out;
    for (const auto& c : params.at("components"))
      out.push_back(distribution_from_json(c));
    return out;
  };
  auto num = [&](const std::string& key) { return number_at(params, key, name); };

  switch (family) {
    case Family::Normal: return DistributionSpec::normal(num("mean"), num("sd"));
    case Family::Laplace: return DistributionSpec::laplace(num("location"), num("scale"));
    case Family::Exponential: return DistributionSpec::exponential(num("rate"));
    case Family::Gamma: return DistributionSpec::gamma(num("shape"), num("rate"));
    case Family::Weibull: return DistributionSpec::weibull(num("shape"), num("scale"));
    case Family::Gumbel: return DistributionSpec::gumbel(num("location"), num("scale"));
    case Family::ChiSquare: return DistributionSpec::chi_square(num("df"));
    case Family::ScaledChiSquare: return DistributionSpec::scaled_chi_square(num("df"), num("divisor"));
    case Family::LaplaceKFold: {
      const double k = num("k");
      if (k != std::floor(k))
        throw ParameterError("LaplaceKFold k must be an integer");
      return DistributionSpec::laplace_kfold(static_cast<int>(k));
    }
    case Family::Mixture: {
      if (!params.contains("weights") || !params.at("weights").is_array())
        throw ParseError("Mixture needs a 'weights' array");
      std::vector<double> w;
      for (const auto& v : params.at("weights")) {
        if (!v.is_number())
          throw ParseError("Mixture weights must be numbers");
        w.push_back(v.get<double>());
      }
      return DistributionSpec::mixture(std::move(w), components());
    }
    case Family::Convolution: {
      auto parts = components();
      if (parts.size() != 2)
        throw ParameterError("Convolution needs exactly two components");
      return DistributionSpec::convolution(std::move(parts[0]), std::move(parts[1]));
    }
  }
  throw ParseError("unhandled distribution family '" + name + "'");
}

json parse_json(const std::string& text)
{
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

json npfd_config_to_json(const NpfdConfig& c)
{
  json j;
  j["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
  j["delta"] = c.delta ? json(*c.delta) : json(nullptr);
  j["n_max"] = c.n_max;
  j["ell"] = c.ell;
  j["K"] = c.K;
  j["t_max"] = c.t_max;
  j["max_doublings"] = c.max_doublings;
  j["df"] = c.df;
  j["df_x"] = c.df_x ? json(*c.df_x) : json(nullptr);
  j["anchor"] = c.anchor == KnotAnchor::Mode ? "mode" : "median";
  j["use_empirical_ft"] = c.use_empirical_ft;
  j["clip_negative"] = c.clip_negative;
  j["rescale_at_zero"] = c.rescale_at_zero;
  j["n_y"] = c.n_y;
  j["force_n"] = c.force_n ? json(*c.force_n) : json(nullptr);
  j["norm"] = c.norm == InversionNorm::Standard ? "standard" : "riemann";
  return j;
}

void apply_npfd_config(const json& j, NpfdConfig& c)
{
  if (!j.is_object())
    throw ParseError("NPFD configuration must be a JSON object");
  try {
    auto opt_double = [&](const char* key, std::optional<double>& dst) {
      if (j.contains(key))
        dst = j.at(key).is_null() ? std::nullopt : std::optional<double>(j.at(key).get<double>());
    };
    auto opt_int = [&](const char* key, std::optional<int>& dst) {
      if (j.contains(key))
        dst = j.at(key).is_null() ? std::nullopt : std::optional<int>(j.at(key).get<int>());
    };
    opt_double("epsilon", c.epsilon);
    opt_double("delta", c.delta);
    opt_int("df_x", c.df_x);
    opt_int("force_n", c.force_n);
    if (j.contains("n_max"))
      c.n_max = j.at("n_max").get<int>();
    if (j.contains("ell"))
      c.ell = j.at("ell").get<std::size_t>();
    if (j.contains("K"))
      c.K = j.at("K").get<std::size_t>();
    if (j.contains("t_max"))
      c.t_max = j.at("t_max").get<double>();
    if (j.contains("max_doublings"))
      c.max_doublings = j.at("max_doublings").get<int>();
    if (j.contains("df"))
      c.df = j.at("df").get<int>();
    if (j.contains("anchor")) {
      const auto a = j.at("anchor").get<std::string>();
      if (a != "mode" && a != "median")
        throw ParseError("anchor must be 'mode' or 'median'");
      c.anchor = a == "mode" ? KnotAnchor::Mode : KnotAnchor::Median;
    }
    if (j.contains("use_empirical_ft"))
      c.use_empirical_ft = j.at("use_empirical_ft").get<bool>();
    if (j.contains("clip_negative"))
      c.clip_negative = j.at("clip_negative").get<bool>();
    if (j.contains("rescale_at_zero"))
      c.rescale_at_zero = j.at("rescale_at_zero").get<bool>();
    if (j.contains("n_y"))
      c.n_y = j.at("n_y").get<std::size_t>();
    if (j.contains("norm")) {
      const auto n = j.at("norm").get<std::string>();
      if (n != "standard" && n != "riemann")
        throw ParseError("norm must be 'standard' or 'riemann'");
      c.norm = n == "standard" ? InversionNorm::Standard : InversionNorm::Riemann;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad NPFD configuration: ") + e.what());
  }
  c.validate();
}

json npfd_result_to_json(const NpfdResult& r)
{
  const auto& d = r.diagnostics;
  json diag = {
    { "phi_at_zero", { { "re", d.phi_at_zero.real() }, { "im", d.phi_at_zero.imag() } } },
    { "max_imaginary", d.max_imaginary },
    { "hit_n_max", d.hit_n_max },
    { "empirical_ft", d.empirical_ft },
    { "epsilon", d.epsilon },
    { "delta", d.delta },
    { "scan_t_max", d.scan_t_max },
    { "doublings", d.doublings },
    { "warnings", d.warnings },
  };
  return {
    { "method", "NPFD" },
    { "N", r.N },
    { "gamma", r.gamma },
    { "R", r.R },
    { "constants", { { "a", r.constants.a }, { "b_x", r.constants.b_x }, { "b_z", r.constants.b_z }, { "b_y", r.constants.b_y } } },
    { "ygrid", nullable(r.ygrid) },
    { "density", nullable(r.density) },
    { "diagnostics", diag },
  };
}

json baseline_result_to_json(BaselineMethod method, const std::vector<double>& ygrid, const BaselineResult& r)
{
  return {
    { "method", method_name(method) },
    { "bandwidth", r.bandwidth },
    { "t_limit", r.t_limit },
    { "ygrid", nullable(ygrid) },
    { "density", nullable(r.density) },
    { "diagnostics", { { "warnings", r.warnings } } },
  };
}

json density_fit_to_json(const DensityFit& fit)
{
  std::vector<double> beta(fit.coefficients().data(), fit.coefficients().data() + fit.coefficients().size());
  return {
    { "knots", fit.knots() },
    { "coefficients", beta },
    { "range", { fit.lo(), fit.hi() } },
    { "normalizer", fit.normalizer() },
    { "df", fit.degrees_of_freedom() },
    { "deviance", fit.deviance() },
    { "iterations", fit.iterations() },
  };
}

json scenario_to_json(const ScenarioSpec& s)
{
  json b = json::object();
  if (s.baseline_config.bandwidth)
    b["bandwidth"] = *s.baseline_config.bandwidth;
  if (s.baseline_config.damping)
    b["damping"] = *s.baseline_config.damping;
  if (s.baseline_config.kernel)
    b["kernel"] = *s.baseline_config.kernel == SmoothingKernel::SincTruncated ? "sinc" : "quartic";
  b["ridge"] = s.baseline_config.ridge;
  return {
    { "id", s.id },
    { "description", s.description },
    { "kind", kind_name(s.kind) },
    { "target", distribution_to_json(s.target) },
    { "convolving", distribution_to_json(s.convolving) },
    { "error_scales", s.error_scales },
    { "n_x", s.n_x },
    { "n_z", s.n_z },
    { "replicates", s.replicates },
    { "seed", s.seed },
    { "baseline", s.baseline ? json(method_name(*s.baseline)) : json(nullptr) },
    { "baseline_config", b },
    { "npfd", npfd_config_to_json(s.npfd) },
  };
}

ScenarioSpec scenario_from_json(const json& j)
{
  if (!j.is_object())
    throw ParseError("scenario JSON must be an object");
  ScenarioSpec s;
  try {
    s.id = j.at("id").get<std::string>();
    s.description = j.value("description", std::string());
    s.kind = kind_from_name(j.value("kind", std::string("sampled")));
    s.target = distribution_from_json(j.at("target"));
    s.convolving = distribution_from_json(j.at("convolving"));
    if (j.contains("error_scales"))
      s.error_scales = j.at("error_scales").get<std::vector<double>>();
    s.n_x = j.value("n_x", std::size_t{ 500 });
    s.n_z = j.value("n_z", s.n_x);
    s.replicates = j.value("replicates", std::size_t{ 100 });
    s.seed = j.value("seed", std::uint64_t{ 1 });
    if (j.contains("baseline") && !j.at("baseline").is_null()) {
      const auto m = j.at("baseline").get<std::string>();
      if (m == "FDD")
        s.baseline = BaselineMethod::FDD;
      else if (m == "MCD")
        s.baseline = BaselineMethod::MCD;
      else if (m == "DKM")
        s.baseline = BaselineMethod::DKM;
      else if (m == "RMD")
        s.baseline = BaselineMethod::RMD;
      else
        throw ParseError("unknown baseline '" + m + "'");
      s.baseline_config.method = *s.baseline;
    }
    if (j.contains("baseline_config")) {
      const json& b = j.at("baseline_config");
      if (b.contains("bandwidth"))
        s.baseline_config.bandwidth = b.at("bandwidth").get<double>();
      if (b.contains("damping"))
        s.baseline_config.damping = b.at("damping").get<double>();
      if (b.contains("ridge"))
        s.baseline_config.ridge = b.at("ridge").get<double>();
      if (b.contains("kernel")) {
        const auto k = b.at("kernel").get<std::string>();
        if (k != "sinc" && k != "quartic")
          throw ParseError("kernel must be 'sinc' or 'quartic'");
        s.baseline_config.kernel = k == "sinc" ? SmoothingKernel::SincTruncated : SmoothingKernel::QuarticFT;
      }
    }
    if (s.kind != ScenarioKind::SampledConvolving)
      s.npfd.use_empirical_ft = true;
    if (s.kind == ScenarioKind::Replicated)
      s.npfd.clip_negative = true;
    if (j.contains("npfd"))
      apply_npfd_config(j.at("npfd"), s.npfd);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad scenario JSON: ") + e.what());
  }
  if (s.baseline == BaselineMethod::DKM)
    s.baseline_config.error = s.convolving;
  s.validate();
  return s;
}

json summary_to_json(const SummaryTable& t)
{
  json methods = json::array();
  for (const auto& m : t.methods) {
    json box = quartiles_json(m.box.box);
    box["lower_whisker"] = nullable(m.box.lower_whisker);
    box["upper_whisker"] = nullable(m.box.upper_whisker);
    box["outliers"] = nullable(m.box.outliers);
    json entry = quartiles_json(m.stats);
    entry["method"] = m.method;
    entry["failures"] = m.failures;
    entry["values"] = nullable(m.values);
    entry["box"] = box;
    methods.push_back(entry);
  }
  json errors = json::array();
  for (std::size_t r = 0; r < t.outcomes.size(); ++r)
    if (!t.outcomes[r].error.empty())
      errors.push_back({ { "replicate", r }, { "error", t.outcomes[r].error } });
  return {
    { "scenario", t.scenario },
    { "replicates", t.replicates },
    { "representative", t.representative },
    { "redraws", t.redraws },
    { "N", t.N },
    { "methods", methods },
    { "errors", errors },
  };
}

std::string format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string summary_to_csv(const SummaryTable& t)
{
  std::ostringstream os;
  os << "method,median,q1,q3,failures\n";
  for (const auto& m : t.methods)
    os << m.method << ',' << format_number(m.stats.median) << ',' << format_number(m.stats.q1) << ','
       << format_number(m.stats.q3) << ',' << m.failures << '\n';
  return os.str();
}

std::string replicates_to_csv(const SummaryTable& t)
{
  std::ostringstream os;
  os << "replicate,seed,attempts,N";
  for (const auto& m : t.methods)
    os << ',' << m.method;
  os << '\n';
  for (std::size_t r = 0; r < t.replicates; ++r) {
    const auto& o = t.outcomes[r];
    os << r << ',' << o.seed << ',' << o.attempts << ',' << o.N;
    for (const auto& m : t.methods)
      os << ',' << format_number(m.values[r]);
    os << '\n';
  }
  return os.str();
}

std::string curves_to_csv(const ReplicateCurves& c, const std::string& baseline_name)
{
  std::ostringstream os;
  const bool base = !c.baseline.empty();
  os << "y,truth,NPFD";
  if (base)
    os << ',' << baseline_name;
  os << '\n';
  for (std::size_t i = 0; i < c.ygrid.size(); ++i) {
    os << format_number(c.ygrid[i]) << ',' << format_number(c.truth[i]) << ',' << format_number(c.npfd[i]);
    if (base)
      os << ',' << format_number(c.baseline[i]);
    os << '\n';
  }
  return os.str();
}

std::string density_to_csv(const std::vector<double>& ygrid, const std::vector<double>& density)
{
  if (ygrid.size() != density.size())
    throw LengthMismatchError("grid and density differ in length");
  std::ostringstream os;
  os << "y,fhat\n";
  for (std::size_t i = 0; i < ygrid.size(); ++i)
    os << format_number(ygrid[i]) << ',' << format_number(density[i]) << '\n';
  return os.str();
}

const std::vector<double>& CsvTable::column(const std::string& name) const
{
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return columns[i];
  throw ParseError("CSV has no column '" + name + "'");
}

bool CsvTable::has(const std::string& name) const
{
  for (const auto& h : header)
    if (h == name)
      return true;
  return false;
}

CsvTable read_csv(std::istream& in)
{
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (t.header.empty() && std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0)
      line.erase(0, 3);
    if (trim(line).empty())
      continue;
    t.header = split(line);
    for (const auto& h : t.header)
      if (h.empty())
        throw ParseError("empty column name in CSV header", lineno);
  }
  if (t.header.empty())
    throw ParseError("CSV has no header row");
  t.columns.resize(t.header.size());
  std::vector<bool> ended(t.header.size(), false);

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    auto cells = split(line);
    if (cells.size() > t.header.size())
      throw ParseError("row has " + std::to_string(cells.size()) + " fields, header has " +
                         std::to_string(t.header.size()),
                       lineno);
    cells.resize(t.header.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      if (cell.empty()) {
        ended[c] = true;
        continue;
      }
      if (ended[c])
        throw ParseError("missing value in column '" + t.header[c] + "'", lineno);
      double v = 0.0;
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (*first == '+')
        ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ParseError("not a finite number: '" + cell + "' in column '" + t.header[c] + "'", lineno);
      t.columns[c].push_back(v);
    }
  }
  return t;
}

CsvTable read_csv_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open '" + path + "'");
  return read_csv(in);
}

} // namespace deconvkit
