#include "nesslab_app/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nesslab/io.hpp"

namespace nesslab::app {

namespace pt = boost::property_tree;

namespace {

const std::vector<std::pair<std::string, std::vector<std::string>>>& schema() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> s = {
      {"", {"schema_version", "seed", "output"}},
      {"model", {"kind", "lambda_aniso", "t_hop", "v"}},
      {"chain", {"n_sites", "boundary", "dim_cap"}},
      {"bias", {"beta", "lambda"}},
      {"geometry", {"L", "M", "strict"}},
      {"window", {"kind", "T", "sigma"}},
      {"scan", {"x_values", "t_values", "M_values", "gap", "flat_times", "eps_windows", "singularity_sizes"}},
      {"checks", {"sumrule_tol", "derivative_tol", "current_threshold"}},
  };
  return s;
}

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(trim(std::string_view(s).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ConfigError(key + ": not an integer: '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const ConfigError&) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> get(const std::string& table, const std::string& key) const {
    const pt::ptree* t = &tree_;
    if (!table.empty()) {
      const auto it = tree_.find(table);
      if (it == tree_.not_found()) return std::nullopt;
      t = &it->second;
    }
    const auto it = t->find(key);
    if (it == t->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  template <class T, class F>
  void read(const std::string& table, const std::string& key, T& target, F&& parse) const {
    if (auto v = get(table, key)) target = parse(name(table, key), *v);
  }

  static std::string name(const std::string& table, const std::string& key) {
    return table.empty() ? key : table + "." + key;
  }

 private:
  const pt::ptree& tree_;
};

auto as_int = [](const std::string& k, const std::string& v) { return static_cast<int>(parse_int(k, v)); };
auto as_real = [](const std::string& k, const std::string& v) { return parse_real(k, v); };
auto as_bool = [](const std::string& k, const std::string& v) { return parse_bool(k, v); };
auto as_string = [](const std::string&, const std::string& v) { return v; };
auto as_reals = [](const std::string& k, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_real(k, s));
  return out;
};
auto as_ints = [](const std::string& k, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<int>(parse_int(k, s)));
  return out;
};

void check_keys(const pt::ptree& tree) {
  std::set<std::string> tables;
  for (const auto& [table, keys] : schema()) tables.insert(table);
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      const auto& root = schema().front().second;
      if (std::find(root.begin(), root.end(), name) == root.end()) throw ConfigError("unknown key '" + name + "'");
      continue;
    }
    const auto it = std::find_if(schema().begin(), schema().end(), [&](const auto& e) { return e.first == name; });
    if (it == schema().end() || name.empty()) throw ConfigError("unknown table [" + name + "]");
    for (const auto& [key, leaf] : node)
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw ConfigError("unknown key '" + name + "." + key + "'");
  }
}

void apply_env(pt::ptree& tree) {
  for (const auto& [table, keys] : schema())
    for (const auto& key : keys) {
      const std::string var = "NESSLAB_" + (table.empty() ? "" : upper(table) + "_") + upper(key);
      if (const char* v = std::getenv(var.c_str())) tree.put(table.empty() ? key : table + "." + key, std::string(v));
    }
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>)
      out += format_double(xs[i]);
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

ModelConfig::Kind model_kind_from_string(const std::string& s) {
  if (s == "xx") return ModelConfig::Kind::xx;
  if (s == "xxz") return ModelConfig::Kind::xxz;
  if (s == "fermion") return ModelConfig::Kind::fermion;
  throw ConfigError("model.kind: unknown model '" + s + "' (expected xx, xxz or fermion)");
}

}  // namespace

std::string_view to_string(ModelConfig::Kind k) {
  switch (k) {
    case ModelConfig::Kind::xx: return "xx";
    case ModelConfig::Kind::xxz: return "xxz";
    case ModelConfig::Kind::fermion: return "fermion";
  }
  return "?";
}

Model ModelConfig::build() const {
  switch (kind) {
    case Kind::xx: return build_xxz_model(0.0);
    case Kind::xxz: return build_xxz_model(lambda_aniso);
    case Kind::fermion: return build_fermion_model(t_hop, v);
  }
  throw ConfigError("unknown model");
}

CurrentGeometry ExperimentConfig::geometry_for(int L, int M) const {
  CurrentGeometry g = geometry;
  g.L = L;
  g.M = M;
  g.r = model.kind == ModelConfig::Kind::fermion ? static_cast<int>(std::max<std::size_t>(model.v.size(), 1)) : 1;
  return g;
}

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ConfigError("schema_version " + std::to_string(schema_version) + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
  if (output.empty()) throw ConfigError("output must not be empty");
  if (model.kind == ModelConfig::Kind::fermion && model.v.empty())
    throw ConfigError("model.v: the fermion model needs at least one density coupling");
  if (!std::isfinite(model.lambda_aniso) || !std::isfinite(model.t_hop)) throw ConfigError("model parameters must be finite");
  for (double x : model.v)
    if (!std::isfinite(x)) throw ConfigError("model.v entries must be finite");
  chain.validate();
  if (!chain.periodic()) throw PreconditionError("the pipeline needs a periodic chain");
  bias.validate();
  geometry_for(geometry.L, geometry.M).validate(chain);
  window.validate();
  for (int M : scan.M_values) {
    CurrentGeometry g = geometry_for(M + (scan.gap > 0 ? scan.gap : geometry.L - geometry.M), M);
    g.strict = false;
    g.validate(chain);
  }
  for (double t : scan.t_values)
    if (!std::isfinite(t)) throw ConfigError("scan.t_values entries must be finite");
  for (double t : scan.flat_times)
    if (!std::isfinite(t)) throw ConfigError("scan.flat_times entries must be finite");
  for (double e : scan.eps_windows)
    if (!(e > 0.0)) throw ConfigError("scan.eps_windows entries must be positive");
  for (int n : scan.singularity_sizes) {
    ChainConfig c = chain;
    c.n_sites = n;
    c.validate();
  }
  if (scan.gap < 0) throw ConfigError("scan.gap must be non-negative");
  if (!(checks.sumrule_tol > 0.0) || !(checks.derivative_tol > 0.0) || !(checks.current_threshold >= 0.0))
    throw ConfigError("check tolerances must be positive");
}

ExperimentConfig parse_config(const std::string& text, bool env_overrides) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  if (env_overrides) apply_env(tree);
  check_keys(tree);
  const Reader r(tree);
  ExperimentConfig c;
  r.read("", "schema_version", c.schema_version, as_int);
  if (!r.get("", "schema_version")) throw ConfigError("schema_version is required");
  r.read("", "seed", c.seed, [](const std::string& k, const std::string& v) {
    const long long s = parse_int(k, v);
    if (s < 0) throw ConfigError(k + " must be non-negative");
    return static_cast<std::uint64_t>(s);
  });
  r.read("", "output", c.output, as_string);
  r.read("model", "kind", c.model.kind, [](const std::string&, const std::string& v) { return model_kind_from_string(v); });
  r.read("model", "lambda_aniso", c.model.lambda_aniso, as_real);
  r.read("model", "t_hop", c.model.t_hop, as_real);
  r.read("model", "v", c.model.v, as_reals);
  r.read("chain", "n_sites", c.chain.n_sites, as_int);
  r.read("chain", "boundary", c.chain.boundary, [](const std::string&, const std::string& v) { return boundary_from_string(v); });
  r.read("chain", "dim_cap", c.chain.dim_cap, [](const std::string& k, const std::string& v) {
    const long long s = parse_int(k, v);
    if (s <= 0) throw ConfigError(k + " must be positive");
    return static_cast<std::uint64_t>(s);
  });
  r.read("bias", "beta", c.bias.beta, as_real);
  r.read("bias", "lambda", c.bias.lambda, as_real);
  r.read("geometry", "L", c.geometry.L, as_int);
  r.read("geometry", "M", c.geometry.M, as_int);
  r.read("geometry", "strict", c.geometry.strict, as_bool);
  r.read("window", "kind", c.window.kind, [](const std::string&, const std::string& v) { return window_kind_from_string(v); });
  r.read("window", "T", c.window.T, as_real);
  r.read("window", "sigma", c.window.sigma, as_real);
  r.read("scan", "x_values", c.scan.x_values, as_ints);
  r.read("scan", "t_values", c.scan.t_values, as_reals);
  r.read("scan", "M_values", c.scan.M_values, as_ints);
  r.read("scan", "gap", c.scan.gap, as_int);
  r.read("scan", "flat_times", c.scan.flat_times, as_reals);
  r.read("scan", "eps_windows", c.scan.eps_windows, as_reals);
  r.read("scan", "singularity_sizes", c.scan.singularity_sizes, as_ints);
  r.read("checks", "sumrule_tol", c.checks.sumrule_tol, as_real);
  r.read("checks", "derivative_tol", c.checks.derivative_tol, as_real);
  r.read("checks", "current_threshold", c.checks.current_threshold, as_real);
  c.chain.site_dim = 2;
  c.geometry = c.geometry_for(c.geometry.L, c.geometry.M);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, bool env_overrides) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw ConfigError("cannot read config '" + path.string() + "'");
  }
  return parse_config(text, env_overrides);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "schema_version = " << c.schema_version << "\n";
  o << "seed = " << c.seed << "\n";
  o << "output = " << c.output << "\n";
  o << "\n[model]\n";
  o << "kind = " << to_string(c.model.kind) << "\n";
  o << "lambda_aniso = " << format_double(c.model.lambda_aniso) << "\n";
  o << "t_hop = " << format_double(c.model.t_hop) << "\n";
  o << "v = " << join(c.model.v) << "\n";
  o << "\n[chain]\n";
  o << "n_sites = " << c.chain.n_sites << "\n";
  o << "boundary = " << to_string(c.chain.boundary) << "\n";
  o << "dim_cap = " << c.chain.dim_cap << "\n";
  o << "\n[bias]\n";
  o << "beta = " << format_double(c.bias.beta) << "\n";
  o << "lambda = " << format_double(c.bias.lambda) << "\n";
  o << "\n[geometry]\n";
  o << "L = " << c.geometry.L << "\n";
  o << "M = " << c.geometry.M << "\n";
  o << "strict = " << (c.geometry.strict ? "true" : "false") << "\n";
  o << "\n[window]\n";
  o << "kind = " << to_string(c.window.kind) << "\n";
  o << "T = " << format_double(c.window.T) << "\n";
  o << "sigma = " << format_double(c.window.sigma) << "\n";
  o << "\n[scan]\n";
  o << "x_values = " << join(c.scan.x_values) << "\n";
  o << "t_values = " << join(c.scan.t_values) << "\n";
  o << "M_values = " << join(c.scan.M_values) << "\n";
  o << "gap = " << c.scan.gap << "\n";
  o << "flat_times = " << join(c.scan.flat_times) << "\n";
  o << "eps_windows = " << join(c.scan.eps_windows) << "\n";
  o << "singularity_sizes = " << join(c.scan.singularity_sizes) << "\n";
  o << "\n[checks]\n";
  o << "sumrule_tol = " << format_double(c.checks.sumrule_tol) << "\n";
  o << "derivative_tol = " << format_double(c.checks.derivative_tol) << "\n";
  o << "current_threshold = " << format_double(c.checks.current_threshold) << "\n";
  return o.str();
}

}  // namespace nesslab::app
