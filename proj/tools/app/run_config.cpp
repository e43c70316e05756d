#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "csv.hpp"
#include "qlimits/error.hpp"
#include "qlimits/expression.hpp"

namespace qlimits::app {

namespace pt = boost::property_tree;

namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid configuration:";
  for (const auto& l : lines) out += "\n  - " + l;
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_uint(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  // Accept integral values written in floating notation, e.g. 1e5.
  if (auto d = to_double(s); d && *d >= 0.0 && *d == std::floor(*d) && *d < 1.8e19) {
    return static_cast<std::uint64_t>(*d);
  }
  return std::nullopt;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T, class Parse>
  void read(const std::string& section, const std::string& key, T& target, Parse parse,
            const char* expected) {
    const auto text = tree_.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
    if (!text) return;
    if (auto v = parse(*text)) {
      target = *v;
    } else {
      problems.push_back(section + "." + key + ": expected " + expected + ", got '" + *text + "'");
    }
  }

  void number(const std::string& section, const std::string& key, double& target) {
    read(section, key, target, to_double, "a number");
  }
  void number(const std::string& section, const std::string& key, std::optional<double>& target) {
    const auto text = tree_.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
    if (text && trim(*text) == "auto") {
      target.reset();
      return;
    }
    read(section, key, target, to_double, "a number or 'auto'");
  }
  void text(const std::string& section, const std::string& key, std::string& target) {
    read(section, key, target,
         [](const std::string& s) { return std::optional<std::string>(std::string(trim(s))); },
         "text");
  }

  std::vector<std::string> problems;

 private:
  const pt::ptree& tree_;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"kind", "name", "waist", "kappa", "p_scale", "expression"}},
      {"grid", {"dimension", "extent", "points"}},
      {"illumination", {"N", "sigma_P2", "sigma_Q2"}},
      {"scheme", {"kind", "lo_ratio"}},
      {"mc", {"n_trials", "true_p", "seed"}},
      {"sweep", {"axis", "values"}},
      {"output", {"prefix"}},
  };
  return keys;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

double IlluminationSpec::effective_sigma_Q2() const noexcept {
  if (sigma_Q2) return *sigma_Q2;
  return sigma_P2 > 0.0 ? std::max(1.0, 1.0 / sigma_P2) : 1.0;
}

std::string to_string(SchemeChoice scheme) {
  switch (scheme) {
    case SchemeChoice::intensity: return "intensity";
    case SchemeChoice::field: return "field";
    case SchemeChoice::both: return "both";
  }
  return "both";
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::N: return "N";
    case SweepAxis::sigma_P2: return "sigma_P2";
    case SweepAxis::p: return "p";
  }
  return "N";
}

std::optional<SweepAxis> parse_axis(std::string_view text) {
  text = trim(text);
  if (text == "N") return SweepAxis::N;
  if (text == "sigma_P2") return SweepAxis::sigma_P2;
  if (text == "p") return SweepAxis::p;
  return std::nullopt;
}

std::vector<double> parse_value_list(std::string_view text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                               : comma - start));
    auto v = to_double(item);
    if (!v) throw ConfigError({"sweep.values: '" + std::string(item) + "' is not a number"});
    values.push_back(*v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
  }

  std::vector<std::string> problems;
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      problems.push_back("unknown section [" + section + "]");
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) problems.push_back("unknown key " + section + "." + key);
    }
  }

  RunConfig c;
  Reader r(tree);
  r.text("model", "kind", c.model.kind);
  r.text("model", "name", c.model.name);
  r.number("model", "waist", c.model.waist);
  r.number("model", "kappa", c.model.kappa);
  r.number("model", "p_scale", c.model.p_scale);
  r.text("model", "expression", c.model.expression);

  r.read("grid", "dimension", c.grid.dimension,
         [](const std::string& s) -> std::optional<int> {
           auto v = to_uint(s);
           if (!v || *v > 3) return std::nullopt;
           return static_cast<int>(*v);
         },
         "1 or 2");
  r.number("grid", "extent", c.grid.extent);
  {
    const auto pts = tree.get_optional<std::string>("grid.points");
    if (pts && trim(*pts) != "auto") {
      if (auto v = to_uint(*pts)) {
        c.grid.points = static_cast<std::size_t>(*v);
      } else {
        r.problems.push_back("grid.points: expected an integer, got '" + *pts + "'");
      }
    }
  }

  r.number("illumination", "N", c.illumination.N);
  r.number("illumination", "sigma_P2", c.illumination.sigma_P2);
  r.number("illumination", "sigma_Q2", c.illumination.sigma_Q2);

  r.read("scheme", "kind", c.scheme,
         [](const std::string& s) -> std::optional<SchemeChoice> {
           const auto t = trim(s);
           if (t == "intensity") return SchemeChoice::intensity;
           if (t == "field") return SchemeChoice::field;
           if (t == "both") return SchemeChoice::both;
           return std::nullopt;
         },
         "intensity, field or both");
  r.number("scheme", "lo_ratio", c.lo_ratio);

  if (tree.get_child_optional("mc")) {
    McSpec mc;
    r.read("mc", "n_trials", mc.n_trials,
           [](const std::string& s) -> std::optional<std::size_t> {
             auto v = to_uint(s);
             if (!v) return std::nullopt;
             return static_cast<std::size_t>(*v);
           },
           "an integer");
    r.number("mc", "true_p", mc.true_p);
    r.read("mc", "seed", mc.seed, to_uint, "an unsigned 64-bit integer");
    c.mc = mc;
  }

  if (tree.get_child_optional("sweep")) {
    SweepSpec sweep;
    r.read("sweep", "axis", sweep.axis, parse_axis, "N, sigma_P2 or p");
    if (auto values = tree.get_optional<std::string>("sweep.values")) {
      try {
        sweep.values = parse_value_list(*values);
      } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) r.problems.push_back(p);
      }
    }
    c.sweep = sweep;
  }

  r.text("output", "prefix", c.output_prefix);

  problems.insert(problems.end(), r.problems.begin(), r.problems.end());
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate(const RunConfig& c) {
  std::vector<std::string> problems;
  auto require = [&problems](bool ok, std::string what) {
    if (!ok) problems.push_back(std::move(what));
  };

  const auto& m = c.model;
  const bool known_kind = m.kind == "displaced_gaussian" || m.kind == "waist_scaled_gaussian" ||
                          m.kind == "phase_tilt" || m.kind == "custom";
  require(known_kind, "model.kind: unknown model '" + m.kind + "'");
  require(m.waist > 0.0 && std::isfinite(m.waist), "model.waist must be positive");
  require(std::isfinite(m.kappa), "model.kappa must be finite");
  require(!m.p_scale || (*m.p_scale > 0.0 && std::isfinite(*m.p_scale)),
          "model.p_scale must be positive");
  if (m.kind == "custom") {
    require(!m.expression.empty(), "model.expression is required for custom models");
    if (!m.expression.empty()) {
      try {
        Expression::compile(m.expression);
      } catch (const Error& e) {
        problems.push_back(std::string("model.expression: ") + e.what());
      }
    }
  } else {
    require(m.expression.empty(), "model.expression is only valid for custom models");
  }

  require(c.grid.dimension == 1 || c.grid.dimension == 2, "grid.dimension must be 1 or 2");
  require(!c.grid.extent || (*c.grid.extent > 0.0 && std::isfinite(*c.grid.extent)),
          "grid.extent must be positive");
  require(!c.grid.points || *c.grid.points >= TransverseGrid::kMinPointsPerAxis,
          "grid.points must be at least 8");

  std::vector<IlluminationSpec> cases{c.illumination};
  if (c.sweep && c.sweep->axis != SweepAxis::p) {
    for (double v : c.sweep->values) {
      IlluminationSpec s = c.illumination;
      (c.sweep->axis == SweepAxis::N ? s.N : s.sigma_P2) = v;
      cases.push_back(s);
    }
  }
  for (const auto& s : cases) {
    require(s.N > 0.0 && std::isfinite(s.N), "illumination.N must be positive");
    require(s.sigma_P2 > 0.0 && std::isfinite(s.sigma_P2),
            "illumination.sigma_P2 must be positive");
    const double q2 = s.effective_sigma_Q2();
    require(q2 > 0.0 && std::isfinite(q2), "illumination.sigma_Q2 must be positive");
    require(s.sigma_P2 * q2 >= 1.0 - 1e-12,
            "illumination: sigma_P2 * sigma_Q2 must be at least 1 (got sigma_P2 = " +
                format_number(s.sigma_P2) + ", sigma_Q2 = " + format_number(q2) + ")");
    if (c.mc && c.scheme != SchemeChoice::field) {
      require(s.sigma_P2 <= 1.0 + 1e-12,
              "intensity simulation needs sigma_P2 <= 1 (sub-Poisson surrogate)");
    }
  }

  require(!c.lo_ratio || *c.lo_ratio >= 100.0, "scheme.lo_ratio must be at least 100");

  if (c.mc) {
    require(c.mc->n_trials >= 100, "mc.n_trials must be at least 100");
    require(std::isfinite(c.mc->true_p), "mc.true_p must be finite");
  }
  if (c.sweep) {
    require(!c.sweep->values.empty(), "sweep.values must not be empty");
    require(c.sweep->axis != SweepAxis::p || c.mc.has_value(),
            "sweep.axis = p needs an [mc] section");
  }
  require(!c.output_prefix.empty(), "output.prefix must not be empty");

  if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("auto"); };
  out << "[model]\n"
      << "kind = " << c.model.kind << "\n";
  if (!c.model.name.empty()) out << "name = " << c.model.name << "\n";
  out << "waist = " << format_number(c.model.waist) << "\n"
      << "kappa = " << format_number(c.model.kappa) << "\n"
      << "p_scale = " << opt(c.model.p_scale) << "\n";
  if (!c.model.expression.empty()) out << "expression = " << c.model.expression << "\n";

  out << "\n[grid]\n"
      << "dimension = " << c.grid.dimension << "\n"
      << "extent = " << opt(c.grid.extent) << "\n"
      << "points = " << (c.grid.points ? std::to_string(*c.grid.points) : std::string("auto")) << "\n";

  out << "\n[illumination]\n"
      << "N = " << format_number(c.illumination.N) << "\n"
      << "sigma_P2 = " << format_number(c.illumination.sigma_P2) << "\n"
      << "sigma_Q2 = " << opt(c.illumination.sigma_Q2) << "\n";

  out << "\n[scheme]\n"
      << "kind = " << to_string(c.scheme) << "\n"
      << "lo_ratio = " << opt(c.lo_ratio) << "\n";

  if (c.mc) {
    out << "\n[mc]\n"
        << "n_trials = " << c.mc->n_trials << "\n"
        << "true_p = " << format_number(c.mc->true_p) << "\n"
        << "seed = " << c.mc->seed << "\n";
  }
  if (c.sweep) {
    out << "\n[sweep]\n"
        << "axis = " << to_string(c.sweep->axis) << "\n"
        << "values = ";
    for (std::size_t i = 0; i < c.sweep->values.size(); ++i) {
      out << (i ? ", " : "") << format_number(c.sweep->values[i]);
    }
    out << "\n";
  }
  out << "\n[output]\n"
      << "prefix = " << c.output_prefix << "\n";
  return out.str();
}

ImageModel build_model(const ModelSpec& spec) {
  const double p_scale = spec.p_scale.value_or(0.0);
  if (spec.kind == "displaced_gaussian") return displaced_gaussian(spec.waist, p_scale);
  if (spec.kind == "waist_scaled_gaussian") return waist_scaled_gaussian(spec.waist, p_scale);
  if (spec.kind == "phase_tilt") return phase_tilt(spec.waist, spec.kappa, p_scale);
  if (spec.kind == "custom") {
    return custom(spec.name.empty() ? "custom" : spec.name, Expression::compile(spec.expression),
                  spec.waist, p_scale);
  }
  throw ConfigError({"model.kind: unknown model '" + spec.kind + "'"});
}

TransverseGrid build_grid(const RunConfig& c) {
  const auto fallback = TransverseGrid::default_for(c.model.waist, c.grid.dimension);
  return TransverseGrid(c.grid.dimension, c.grid.extent.value_or(fallback.extent()),
                        c.grid.points.value_or(fallback.points_per_axis()));
}

Illumination build_illumination(const IlluminationSpec& spec) {
  return Illumination::from_variances(spec.N, spec.sigma_P2, spec.effective_sigma_Q2());
}

}  // namespace qlimits::app
