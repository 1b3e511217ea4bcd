#include "backpar/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "backpar/error.hpp"

namespace backpar {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"domain", {"dim", "length", "grid", "modes"}},
      {"case", {"name", "u0", "a", "source", "T", "forward_steps"}},
      {"method",
       {"name", "clip_radius", "k", "gamma", "a", "b", "smoothness", "c", "m", "M", "k_rule", "gamma_bar",
        "coefficient_noise", "observe_N", "nodes", "tolerance", "max_iterations", "min_grid", "steps", "scheme"}},
      {"noise", {"delta", "t", "trials", "seed", "threads"}},
      {"illposed", {"T", "delta"}},
      {"output", {"dir"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key, "expected a number, got '" + raw + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key, "expected a nonnegative integer, got '" + raw + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + raw + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

double positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  return v;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  RunConfig cfg;
  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "keys must live inside a [section]");
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!it->second.count(key)) throw ConfigError(full, "unknown key");
      kv[full] = value.data();
    }
  }
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  for (const char* key : {"dim", "length", "grid"}) {
    if (get(std::string("domain.") + key)) cfg.domain_keys.push_back(key);
  }
  if (auto v = get("domain.dim")) {
    const auto d = to_u64("domain.dim", *v);
    if (d != 1 && d != 2) throw ConfigError("domain.dim", "must be 1 or 2");
    cfg.domain.dim = static_cast<int>(d);
  }
  if (auto v = get("domain.length")) {
    const auto l = to_list("domain.length", *v);
    if (l.size() != static_cast<std::size_t>(cfg.domain.dim)) throw ConfigError("domain.length", "needs one entry per axis");
    for (std::size_t i = 0; i < l.size(); ++i) cfg.domain.length[i] = positive("domain.length", l[i]);
  }
  if (auto v = get("domain.grid")) {
    const auto g = to_list("domain.grid", *v);
    if (g.size() != static_cast<std::size_t>(cfg.domain.dim)) throw ConfigError("domain.grid", "needs one entry per axis");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(g[i] >= 1.0) || g[i] != std::floor(g[i])) throw ConfigError("domain.grid", "must be positive integers");
      cfg.domain.grid[i] = static_cast<int>(g[i]);
    }
  }
  if (auto v = get("domain.modes")) {
    cfg.modes = to_u64("domain.modes", *v);
    if (*cfg.modes < 1) throw ConfigError("domain.modes", "must be at least 1");
  }

  if (auto v = get("case.name")) {
    const std::string name = trim(*v);
    bool known = false;
    for (const auto& n : case_names()) known = known || n == name;
    if (!known) throw ConfigError("case.name", "unknown case '" + name + "'");
    cfg.case_name = name;
  }
  if (auto v = get("case.u0")) cfg.u0 = to_list("case.u0", *v);
  if (auto v = get("case.a")) cfg.a = positive("case.a", to_double("case.a", *v));
  if (auto v = get("case.source")) {
    const std::string s = trim(*v);
    bool known = false;
    for (const auto& n : source_names()) known = known || n == s;
    if (!known) throw ConfigError("case.source", "unknown source '" + s + "'");
    cfg.source = s;
  }
  if (auto v = get("case.T")) cfg.T = positive("case.T", to_double("case.T", *v));
  if (auto v = get("case.forward_steps")) {
    cfg.forward_steps = to_u64("case.forward_steps", *v);
    if (*cfg.forward_steps < 1) throw ConfigError("case.forward_steps", "must be at least 1");
  }

  auto& m = cfg.method_cfg;
  if (auto v = get("method.name")) {
    cfg.method = trim(*v);
    try {
      m.method = method_from_name(cfg.method);
    } catch (const DomainError& e) {
      throw ConfigError("method.name", e.what());
    }
  }
  auto num = [&](const char* key, double& dst) {
    if (auto v = get(key)) dst = to_double(key, *v);
  };
  num("method.clip_radius", m.clip_radius);
  num("method.k", m.k);
  num("method.gamma", m.gamma);
  num("method.a", m.a);
  num("method.b", m.b);
  num("method.smoothness", m.smoothness);
  num("method.c", m.c);
  num("method.m", m.m);
  num("method.M", m.M);
  num("method.k_rule", m.k_rule);
  num("method.gamma_bar", m.gamma_bar);
  num("method.tolerance", m.mild.tolerance);
  if (auto v = get("method.coefficient_noise")) m.coefficient_noise = to_bool("method.coefficient_noise", *v);
  if (auto v = get("method.observe_N")) m.observe_N = to_u64("method.observe_N", *v);
  if (auto v = get("method.nodes")) m.mild.nodes = to_u64("method.nodes", *v);
  if (auto v = get("method.max_iterations")) m.mild.max_iterations = to_u64("method.max_iterations", *v);
  if (auto v = get("method.min_grid")) m.mild.min_grid = m.qr.min_grid = static_cast<int>(to_u64("method.min_grid", *v));
  if (auto v = get("method.steps")) m.qr.steps = to_u64("method.steps", *v);
  if (auto v = get("method.scheme")) {
    const std::string s = trim(*v);
    if (s == "auto") m.qr.scheme = DiffusionScheme::Auto;
    else if (s == "spectral") m.qr.scheme = DiffusionScheme::SpectralExact;
    else if (s == "grid") m.qr.scheme = DiffusionScheme::GridImplicit;
    else throw ConfigError("method.scheme", "expected auto, spectral or grid");
  }
  try {
    m.mild.validate();
  } catch (const DomainError& e) {
    throw ConfigError("method", e.what());
  }

  if (auto v = get("noise.delta")) {
    cfg.deltas = to_list("noise.delta", *v);
    for (double d : cfg.deltas) {
      if (!(d > 0.0 && d < 1.0)) throw ConfigError("noise.delta", "entries must lie in (0, 1)");
    }
  }
  if (auto v = get("noise.t")) {
    cfg.t_fractions = to_list("noise.t", *v);
    for (double f : cfg.t_fractions) {
      if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("noise.t", "entries are fractions of T in [0, 1]");
    }
  }
  if (auto v = get("noise.trials")) cfg.trials = to_u64("noise.trials", *v);
  if (auto v = get("noise.seed")) cfg.seed = to_u64("noise.seed", *v);
  if (auto v = get("noise.threads")) cfg.threads = static_cast<unsigned>(to_u64("noise.threads", *v));
  if (auto v = get("illposed.T")) cfg.illposed_T = positive("illposed.T", to_double("illposed.T", *v));
  if (auto v = get("illposed.delta")) {
    cfg.illposed_deltas = to_list("illposed.delta", *v);
    for (double d : cfg.illposed_deltas) {
      if (!(d > 0.0 && d <= 1.0)) throw ConfigError("illposed.delta", "entries must lie in (0, 1]");
    }
  }
  if (auto v = get("output.dir")) cfg.out_dir = trim(*v);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

ManufacturedCase build_case(const RunConfig& cfg) {
  if (!cfg.case_name) {
    if (!cfg.T) throw ConfigError("T", "required when no case name is given");
    if (!cfg.u0) throw ConfigError("u0", "required when no case name is given");
  }
  ManufacturedCase c = cfg.case_name ? case_spec(*cfg.case_name) : ManufacturedCase{};
  if (!cfg.case_name) c.name = "inline";
  if (cfg.case_name) {
    for (const auto& key : cfg.domain_keys) {
      if (key == "dim") c.domain.dim = cfg.domain.dim;
      if (key == "length") c.domain.length = cfg.domain.length;
      if (key == "grid") c.domain.grid = cfg.domain.grid;
    }
  } else {
    c.domain = cfg.domain;
  }
  if (cfg.u0) c.u0 = *cfg.u0;
  if (cfg.a) c.a = Coefficient::constant(*cfg.a);
  if (cfg.source) c.source = source_by_name(*cfg.source);
  if (cfg.T) c.T = *cfg.T;
  if (cfg.forward_steps) c.forward_steps = *cfg.forward_steps;
  if (cfg.modes) c.inversion_modes = *cfg.modes;
  return manufacture(std::move(c));
}

std::vector<double> requested_times(const RunConfig& cfg, double T) {
  std::vector<double> out;
  for (double f : cfg.t_fractions) out.push_back(f * T);
  return out;
}

std::vector<std::string> RunConfig::provenance() const {
  std::vector<std::string> p;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + format_number(x);
    return s;
  };
  p.push_back("domain.dim = " + std::to_string(domain.dim));
  p.push_back("case.name = " + (case_name ? *case_name : std::string("inline")));
  if (T) p.push_back("case.T = " + format_number(*T));
  p.push_back("method.name = " + method);
  const auto& m = method_cfg;
  p.push_back("method.clip_radius = " + format_number(m.clip_radius) + ", k = " + format_number(m.k) +
              ", gamma = " + format_number(m.gamma) + ", a = " + format_number(m.a) + ", b = " + format_number(m.b));
  p.push_back("method.c = " + format_number(m.c) + ", m = " + format_number(m.m) + ", M = " + format_number(m.M) +
              ", k_rule = " + format_number(m.k_rule) + ", gamma_bar = " + format_number(m.gamma_bar) +
              ", coefficient_noise = " + (m.coefficient_noise ? "true" : "false"));
  p.push_back("method.nodes = " + std::to_string(m.mild.nodes) + ", tolerance = " + format_number(m.mild.tolerance) +
              ", max_iterations = " + std::to_string(m.mild.max_iterations) +
              ", steps = " + std::to_string(m.qr.steps == 0 ? 200 : m.qr.steps));
  p.push_back("noise.delta = " + list(deltas) + "; noise.t = " + list(t_fractions) +
              "; noise.trials = " + std::to_string(trials) + "; noise.seed = " + std::to_string(seed));
  return p;
}

}  // namespace backpar
