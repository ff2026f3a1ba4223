/**
 * @file config.hpp
 * @brief YAML run configuration: parsing, validation and canonical form.
 *
 * Sections: roughness, physics, forcing, regime, discretization, output.
 * Every violation is collected before a ValidationError is thrown; malformed
 * YAML raises ParseError with the 1-based line and column.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "roughfilm/cell_heat.hpp"
#include "roughfilm/errors.hpp"
#include "roughfilm/format.hpp"
#include "roughfilm/functions.hpp"
#include "roughfilm/geometry.hpp"
#include "roughfilm/macro_model.hpp"
#include "roughfilm/params.hpp"

namespace roughfilm {

struct OutputOptions {
  std::string directory = "out";
  bool json = true;
  bool csv = true;
  int precision = 12;
  bool dump_fields = false;
};

struct RunConfig {
  ProfileSpec roughness = cosine_profile(1.0, 0.0);
  FluidParams physics;
  ForcingData forcing;
  RegimeSpec regime;
  Discretization discretization;
  OutputOptions output;
};

inline constexpr int kMinResolution = 8;
inline constexpr int kMaxResolution = 1024;

namespace detail {

/// Walks a YAML tree, recording violations instead of throwing on the first.
class ConfigReader {
 public:
  explicit ConfigReader(std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {}

  std::vector<std::string> violations;

  static std::string where(const YAML::Node& n) {
    const auto m = n.Mark();
    if (m.line < 0) return "";
    return " (line " + std::to_string(m.line + 1) + ")";
  }

  void check_keys(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!map || !map.IsMap()) return;
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) violations.push_back("unknown key " + join(path, key) + where(kv.first));
    }
  }

  YAML::Node section(const YAML::Node& root, const std::string& name, bool required) {
    const YAML::Node n = root[name];
    if (!n) {
      if (required) violations.push_back("missing section " + name);
      return n;
    }
    if (!n.IsMap()) {
      violations.push_back(name + " must be a mapping" + where(n));
      return YAML::Node();
    }
    return n;
  }

  std::optional<double> number(const YAML::Node& parent, const std::string& path, const char* key,
                               bool required) {
    if (!parent || !parent[key]) {
      if (required) violations.push_back("missing required field " + join(path, key));
      return std::nullopt;
    }
    const YAML::Node n = parent[key];
    try {
      if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
      return n.as<double>();
    } catch (const YAML::Exception&) {
      violations.push_back(join(path, key) + " must be a number" + where(n));
      return std::nullopt;
    }
  }

  std::optional<int> integer(const YAML::Node& parent, const std::string& path, const char* key) {
    if (!parent || !parent[key]) return std::nullopt;
    const YAML::Node n = parent[key];
    try {
      if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
      return n.as<int>();
    } catch (const YAML::Exception&) {
      violations.push_back(join(path, key) + " must be an integer" + where(n));
      return std::nullopt;
    }
  }

  std::optional<bool> boolean(const YAML::Node& parent, const std::string& path, const char* key) {
    if (!parent || !parent[key]) return std::nullopt;
    const YAML::Node n = parent[key];
    try {
      if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      violations.push_back(join(path, key) + " must be true or false" + where(n));
      return std::nullopt;
    }
  }

  std::optional<std::string> text(const YAML::Node& parent, const std::string& path, const char* key,
                                  bool required = false) {
    if (!parent || !parent[key]) {
      if (required) violations.push_back("missing required field " + join(path, key));
      return std::nullopt;
    }
    const YAML::Node n = parent[key];
    if (!n.IsScalar()) {
      violations.push_back(join(path, key) + " must be a string" + where(n));
      return std::nullopt;
    }
    return n.as<std::string>();
  }

  std::optional<std::vector<double>> numbers(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) {
      violations.push_back(path + " must be a list of numbers" + where(n));
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& item : n) {
      try {
        out.push_back(item.as<double>());
      } catch (const YAML::Exception&) {
        violations.push_back(path + " must be a list of numbers" + where(item));
        return std::nullopt;
      }
    }
    return out;
  }

  std::optional<std::vector<double>> numbers(const YAML::Node& parent, const std::string& path, const char* key) {
    if (!parent || !parent[key]) return std::nullopt;
    return numbers(parent[key], join(path, key));
  }

  /// Numbers from a text file, separated by whitespace or commas; '#' starts a comment.
  std::optional<std::vector<double>> numbers_from_file(const std::string& file, const std::string& path) {
    std::filesystem::path p(file);
    if (p.is_relative()) p = base_dir_ / p;
    std::ifstream in(p);
    if (!in) {
      violations.push_back(path + ": cannot read " + p.string());
      return std::nullopt;
    }
    std::vector<double> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      for (char& c : line)
        if (c == ',' || c == ';') c = ' ';
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) {
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
          violations.push_back(path + ": bad number '" + tok + "' in " + p.string() + " line " +
                               std::to_string(line_no));
          return std::nullopt;
        }
        out.push_back(v);
      }
    }
    return out;
  }

  /// f1, g or G: a bare number, or a mapping with a kind.
  std::optional<MacroFunction> function(const YAML::Node& parent, const std::string& path, const char* key,
                                        bool periodic) {
    const std::string full = join(path, key);
    if (!parent || !parent[key]) return std::nullopt;
    const YAML::Node n = parent[key];
    if (n.IsScalar()) {
      try {
        return MacroFunction::constant(n.as<double>(), periodic);
      } catch (const YAML::Exception&) {
        violations.push_back(full + " must be a number or a mapping with a kind" + where(n));
        return std::nullopt;
      }
    }
    if (!n.IsMap()) {
      violations.push_back(full + " must be a number or a mapping with a kind" + where(n));
      return std::nullopt;
    }
    const auto kind = text(n, full, "kind", true);
    if (!kind) return std::nullopt;
    const std::size_t before = violations.size();
    FunctionForm form;
    if (*kind == "constant") {
      check_keys(n, full, {"kind", "value"});
      form = ConstantForm{number(n, full, "value", true).value_or(0.0)};
    } else if (*kind == "polynomial") {
      check_keys(n, full, {"kind", "coefficients"});
      auto c = numbers(n, full, "coefficients");
      if (!c) violations.push_back("missing required field " + join(full, "coefficients"));
      form = PolynomialForm{c.value_or(std::vector<double>{})};
    } else if (*kind == "cosine") {
      check_keys(n, full, {"kind", "mean", "amplitude", "frequency", "phase"});
      CosineForm c;
      c.mean = number(n, full, "mean", false).value_or(0.0);
      c.amplitude = number(n, full, "amplitude", true).value_or(0.0);
      c.frequency = number(n, full, "frequency", false).value_or(1.0);
      c.phase = number(n, full, "phase", false).value_or(0.0);
      form = c;
    } else if (*kind == "tabulated") {
      check_keys(n, full, {"kind", "x", "y", "values", "file"});
      TabulatedForm t;
      std::optional<std::vector<double>> values = numbers(n, full, "values");
      if (auto f = text(n, full, "file")) values = numbers_from_file(*f, join(full, "file"));
      if (values) {
        // Uniform samples: periodic ones on z_k = -1/2 + k/n, the others
        // from -1/2 to 1/2 inclusive.
        const std::size_t m = values->size();
        if (m < 2) {
          violations.push_back(full + " needs at least 2 values");
          return std::nullopt;
        }
        for (std::size_t i = 0; i < m; ++i)
          t.x.push_back(periodic ? -0.5 + static_cast<double>(i) / m : -0.5 + static_cast<double>(i) / (m - 1));
        t.y = *values;
      } else {
        auto x = numbers(n, full, "x");
        auto y = numbers(n, full, "y");
        if (!x || !y) {
          violations.push_back(full + " needs x and y lists, values, or file");
          return std::nullopt;
        }
        t.x = *x;
        t.y = *y;
      }
      form = std::move(t);
    } else {
      violations.push_back(join(full, "kind") + " must be one of constant, tabulated, polynomial, cosine" +
                           where(n["kind"]));
      return std::nullopt;
    }
    if (violations.size() != before) return std::nullopt;
    try {
      MacroFunction f(std::move(form), periodic);
      for (double x : {-0.5, -0.25, 0.0, 0.25, 0.5})
        if (!std::isfinite(f(x))) violations.push_back(full + " is not finite on its domain");
      return f;
    } catch (const Error& e) {
      violations.push_back(full + ": " + e.what());
      return std::nullopt;
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::filesystem::path base_dir_;
};

}  // namespace detail

/// Parses and validates config text. Relative sample-file paths resolve
/// against base_dir.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || root.IsNull()) throw ValidationError({"config is empty"});
  if (!root.IsMap()) throw ParseError("top level must be a mapping", root.Mark().line + 1, root.Mark().column + 1);

  RunConfig cfg;
  detail::ConfigReader r(base_dir);
  r.check_keys(root, "", {"roughness", "physics", "forcing", "regime", "discretization", "output"});

  // roughness
  if (const auto n = r.section(root, "roughness", true)) {
    r.check_keys(n, "roughness", {"kind", "mean", "amplitude", "harmonics", "samples", "sample_file"});
    const auto kind = r.text(n, "roughness", "kind", true);
    if (kind && *kind == "cosine") {
      CosineSpec spec;
      spec.mean = r.number(n, "roughness", "mean", true).value_or(1.0);
      if (auto a = r.number(n, "roughness", "amplitude", false); a && *a != 0.0) spec.harmonics.push_back({1, *a, 0.0});
      if (const auto hs = n["harmonics"]) {
        if (!hs.IsSequence()) {
          r.violations.push_back("roughness.harmonics must be a list" + detail::ConfigReader::where(hs));
        } else {
          int idx = 0;
          for (const auto& h : hs) {
            const std::string path = "roughness.harmonics[" + std::to_string(idx++) + "]";
            r.check_keys(h, path, {"order", "amplitude", "phase"});
            Harmonic hm;
            hm.order = r.integer(h, path, "order").value_or(1);
            hm.amplitude = r.number(h, path, "amplitude", true).value_or(0.0);
            hm.phase = r.number(h, path, "phase", false).value_or(0.0);
            if (hm.order < 1) r.violations.push_back(path + ".order must be >= 1");
            spec.harmonics.push_back(hm);
          }
        }
      }
      if (n["samples"] || n["sample_file"])
        r.violations.push_back("roughness.samples and roughness.sample_file apply to kind tabulated only");
      cfg.roughness = spec;
    } else if (kind && *kind == "tabulated") {
      std::optional<std::vector<double>> samples = r.numbers(n, "roughness", "samples");
      if (auto f = r.text(n, "roughness", "sample_file")) {
        if (samples) r.violations.push_back("roughness: give samples or sample_file, not both");
        samples = r.numbers_from_file(*f, "roughness.sample_file");
      }
      if (!samples && !n["samples"] && !n["sample_file"])
        r.violations.push_back("missing required field roughness.samples (or roughness.sample_file)");
      if (n["amplitude"] || n["harmonics"])
        r.violations.push_back("roughness.amplitude and roughness.harmonics apply to kind cosine only");
      cfg.roughness = TabulatedSpec{samples.value_or(std::vector<double>{})};
    } else if (kind) {
      r.violations.push_back("roughness.kind must be cosine or tabulated" + detail::ConfigReader::where(n["kind"]));
    }
  }

  // physics
  if (const auto n = r.section(root, "physics", true)) {
    r.check_keys(n, "physics", {"N", "Pr", "L", "D", "M", "Ra", "k", "q_left", "q_right"});
    FluidParams& p = cfg.physics;
    p.N = r.number(n, "physics", "N", true).value_or(p.N);
    p.Pr = r.number(n, "physics", "Pr", true).value_or(p.Pr);
    p.L = r.number(n, "physics", "L", true).value_or(p.L);
    p.D = r.number(n, "physics", "D", false).value_or(0.0);
    p.M = r.number(n, "physics", "M", false).value_or(0.0);
    p.Ra = r.number(n, "physics", "Ra", false).value_or(0.0);
    p.k = r.number(n, "physics", "k", false).value_or(0.0);
    p.q_left = r.number(n, "physics", "q_left", true).value_or(0.0);
    p.q_right = r.number(n, "physics", "q_right", true).value_or(0.0);
  }

  // forcing
  if (const auto n = r.section(root, "forcing", false)) {
    r.check_keys(n, "forcing", {"f1", "g", "G"});
    if (auto f = r.function(n, "forcing", "f1", false)) cfg.forcing.f1 = *f;
    if (auto f = r.function(n, "forcing", "g", false)) cfg.forcing.g = *f;
    if (auto f = r.function(n, "forcing", "G", true)) cfg.forcing.G = *f;
  }

  // regime
  if (const auto n = r.section(root, "regime", false)) {
    r.check_keys(n, "regime", {"mode", "lambda", "threshold"});
    if (auto m = r.text(n, "regime", "mode")) {
      if (*m == "auto") cfg.regime.mode = RegimeMode::Auto;
      else if (*m == "critical") cfg.regime.mode = RegimeMode::Critical;
      else if (*m == "subcritical") cfg.regime.mode = RegimeMode::Subcritical;
      else if (*m == "supercritical") cfg.regime.mode = RegimeMode::Supercritical;
      else r.violations.push_back("regime.mode must be auto, critical, subcritical or supercritical");
    }
    cfg.regime.lambda = r.number(n, "regime", "lambda", false).value_or(cfg.regime.lambda);
    cfg.regime.threshold = r.number(n, "regime", "threshold", false).value_or(cfg.regime.threshold);
  }
  if (cfg.regime.mode == RegimeMode::Supercritical) cfg.regime.lambda = std::numeric_limits<double>::infinity();
  if (std::isnan(cfg.regime.lambda) || cfg.regime.lambda < 0.0)
    r.violations.push_back("regime.lambda must be non-negative");
  if (cfg.regime.mode == RegimeMode::Critical && !(cfg.regime.lambda > 0.0))
    r.violations.push_back("regime.lambda must be positive in critical mode");
  if (!(cfg.regime.threshold > 0.0) || !std::isfinite(cfg.regime.threshold))
    r.violations.push_back("regime.threshold must be positive and finite");

  // discretization
  if (const auto n = r.section(root, "discretization", false)) {
    r.check_keys(n, "discretization", {"n1", "n2", "nx1", "tol", "max_unknowns"});
    Discretization& d = cfg.discretization;
    d.n1 = r.integer(n, "discretization", "n1").value_or(d.n1);
    d.n2 = r.integer(n, "discretization", "n2").value_or(d.n2);
    d.nx1 = r.integer(n, "discretization", "nx1").value_or(d.nx1);
    d.tol = r.number(n, "discretization", "tol", false).value_or(d.tol);
    d.max_unknowns = r.integer(n, "discretization", "max_unknowns").value_or(d.max_unknowns);
  }
  {
    const Discretization& d = cfg.discretization;
    for (auto [v, name] : {std::pair{d.n1, "n1"}, std::pair{d.n2, "n2"}}) {
      if (v < kMinResolution || v > kMaxResolution)
        r.violations.push_back(std::string("discretization.") + name + " must lie in [8, 1024]");
      else if (v % 2 != 0)
        r.violations.push_back(std::string("discretization.") + name + " must be even");
    }
    if (d.nx1 < 2) r.violations.push_back("discretization.nx1 must be at least 2");
    if (!(d.tol > 0.0 && d.tol < 1.0)) r.violations.push_back("discretization.tol must lie in (0,1)");
    if (d.max_unknowns < 1) r.violations.push_back("discretization.max_unknowns must be positive");
  }

  // output
  if (const auto n = r.section(root, "output", false)) {
    r.check_keys(n, "output", {"directory", "formats", "precision", "dump_fields", "surface_measure"});
    OutputOptions& o = cfg.output;
    o.directory = r.text(n, "output", "directory").value_or(o.directory);
    if (const auto f = n["formats"]) {
      std::vector<std::string> names;
      if (f.IsScalar()) names.push_back(f.as<std::string>());
      else if (f.IsSequence()) for (const auto& x : f) names.push_back(x.as<std::string>());
      o.json = o.csv = false;
      for (const auto& s : names) {
        if (s == "json") o.json = true;
        else if (s == "csv") o.csv = true;
        else if (s == "both") o.json = o.csv = true;
        else r.violations.push_back("output.formats entries must be json, csv or both");
      }
    }
    o.precision = r.integer(n, "output", "precision").value_or(o.precision);
    if (o.precision < 1 || o.precision > 17) r.violations.push_back("output.precision must lie in [1, 17]");
    o.dump_fields = r.boolean(n, "output", "dump_fields").value_or(o.dump_fields);
    if (auto s = r.text(n, "output", "surface_measure")) {
      if (*s == "arclength") cfg.discretization.surface_measure = SurfaceMeasure::Arclength;
      else if (*s == "flat") cfg.discretization.surface_measure = SurfaceMeasure::Flat;
      else r.violations.push_back("output.surface_measure must be arclength or flat");
    }
  }

  for (auto& v : cfg.physics.violations()) r.violations.push_back("physics: " + v);
  if (r.violations.empty()) {
    try {
      (void)make_profile(cfg.roughness);
    } catch (const Error& e) {
      r.violations.push_back(std::string("roughness: ") + e.what());
    }
  }
  if (!r.violations.empty()) throw ValidationError(std::move(r.violations));
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

namespace detail {

inline nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_shortest(v);
}

inline nlohmann::json function_json(const MacroFunction& f) {
  nlohmann::json j;
  std::visit(
      [&](const auto& form) {
        using T = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<T, ConstantForm>) {
          j = {{"kind", "constant"}, {"value", form.value}};
        } else if constexpr (std::is_same_v<T, TabulatedForm>) {
          j = {{"kind", "tabulated"}, {"x", form.x}, {"y", form.y}};
        } else if constexpr (std::is_same_v<T, PolynomialForm>) {
          j = {{"kind", "polynomial"}, {"coefficients", form.coefficients}};
        } else {
          j = {{"kind", "cosine"},
               {"mean", form.mean},
               {"amplitude", form.amplitude},
               {"frequency", form.frequency},
               {"phase", form.phase}};
        }
      },
      f.form());
  return j;
}

}  // namespace detail

/// Every field that can change a computed number, in a fixed layout: resolved
/// sample values instead of file names, defaults filled in. Output location
/// and file formats are left out, and so are M and Ra: they are validated but
/// do not enter the limit equations.
inline nlohmann::json canonical_config(const RunConfig& c) {
  using nlohmann::json;
  json rough;
  if (const auto* cos = std::get_if<CosineSpec>(&c.roughness)) {
    json hs = json::array();
    for (const auto& h : cos->harmonics) hs.push_back({{"order", h.order}, {"amplitude", h.amplitude}, {"phase", h.phase}});
    rough = {{"kind", "cosine"}, {"mean", cos->mean}, {"harmonics", hs}};
  } else {
    rough = {{"kind", "tabulated"}, {"samples", std::get<TabulatedSpec>(c.roughness).samples}};
  }
  const FluidParams& p = c.physics;
  const Discretization& d = c.discretization;
  return {
      {"roughness", rough},
      {"physics",
       {{"N", p.N}, {"Pr", p.Pr}, {"L", p.L}, {"D", p.D}, {"k", p.k},
        {"q_left", p.q_left}, {"q_right", p.q_right}}},
      {"forcing",
       {{"f1", detail::function_json(c.forcing.f1)},
        {"g", detail::function_json(c.forcing.g)},
        {"G", detail::function_json(c.forcing.G)}}},
      {"regime",
       {{"mode", to_string(c.regime.mode)},
        {"lambda", detail::number_json(c.regime.lambda)},
        {"threshold", c.regime.threshold}}},
      {"discretization",
       {{"n1", d.n1}, {"n2", d.n2}, {"nx1", d.nx1}, {"tol", d.tol}, {"max_unknowns", d.max_unknowns},
        {"surface_measure", to_string(d.surface_measure)}}},
      {"output", {{"precision", c.output.precision}}},
  };
}

/// 64-bit FNV-1a of the canonical config, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
  const std::string text = canonical_config(c).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
  return out;
}

}  // namespace roughfilm
