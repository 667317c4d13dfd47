#include "mfbel/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "mfbel/rng.hpp"

namespace mfbel {

const char* to_string(FdScheme scheme) noexcept { return scheme == FdScheme::central ? "central" : "forward"; }

const char* to_string(CurveResolver resolver) noexcept {
  return resolver == CurveResolver::particle ? "particle" : "analytic";
}

const char* to_string(DividendConvention convention) noexcept {
  return convention == DividendConvention::literal ? "literal" : "risk_neutral";
}

bool RunConfig::has_method(const std::string& name) const {
  return std::find(methods.begin(), methods.end(), name) != methods.end();
}

EstimatorConfig RunConfig::estimator_config() const {
  EstimatorConfig c;
  c.x0 = x0;
  c.horizon = horizon;
  c.n_steps = n_steps;
  c.n_paths = n_paths;
  c.seed = seed;
  c.threads = threads;
  c.scheme = log_euler ? Scheme::log_euler : Scheme::euler;
  c.resolver = resolver;
  c.particles.n_particles = n_particles;
  c.particles.tol = particle_tol;
  c.particles.max_iters = particle_max_iters;
  c.particles.seed = derive_seed(seed, 0x9A);
  c.particles.scheme = c.scheme;
  c.particles.threads = threads;
  c.generic_weight = generic_weight;
  c.common_random_numbers = crn;
  c.dividend_convention = dividend_convention;
  c.record_wall_time = record_wall_time;
  return c;
}

CompareOptions RunConfig::compare_options() const {
  CompareOptions o;
  o.fd_scheme = fd_scheme;
  o.include_malliavin = has_method("malliavin");
  o.include_pathwise = has_method("pathwise");
  return o;
}

namespace {

const std::set<std::string> kKeys = {
    "model",      "params",         "payoff",         "K",
    "x0",         "T",              "n_steps",        "n_paths",
    "seed",       "methods",        "h_list",         "fd_scheme",
    "crn",        "resolver",       "n_particles",    "particle_tol",
    "particle_max_iters",           "log_euler",      "generic_weight",
    "dump_paths", "record_wall_time", "dividend_convention", "output",
    "threads",
};

const std::set<std::string> kMethods = {"malliavin", "fd", "pathwise"};

std::string where(const std::string& source, const YAML::Mark& mark) {
  if (mark.is_null()) return source;
  return source + ":" + std::to_string(mark.line + 1);
}

[[noreturn]] void parse_error(const std::string& source, const YAML::Node& node, const std::string& message) {
  fail(ErrorCode::config_parse, where(source, node.Mark()) + ": " + message);
}

template <class T>
T read(const std::string& source, const std::string& key, const YAML::Node& node) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    parse_error(source, node, "bad value for '" + key + "'");
  }
}

std::size_t read_count(const std::string& source, const std::string& key, const YAML::Node& node) {
  const auto value = read<long long>(source, key, node);
  if (value < 0) parse_error(source, node, "'" + key + "' must be non-negative");
  return static_cast<std::size_t>(value);
}

template <class Enum>
Enum read_choice(const std::string& source, const std::string& key, const YAML::Node& node,
                 std::initializer_list<std::pair<const char*, Enum>> choices) {
  const auto text = read<std::string>(source, key, node);
  for (const auto& [name, value] : choices) {
    if (text == name) return value;
  }
  parse_error(source, node, "unknown " + key + " '" + text + "'");
}

/// Calls report(key, message) for the first violated range constraint.
template <class Report>
void check_ranges(const RunConfig& c, Report&& report) {
  auto check = [&](bool ok, const char* key, const std::string& message) {
    if (!ok) report(key, message);
  };
  check(std::find(std::begin(kModelIds), std::end(kModelIds), c.model) != std::end(kModelIds), "model",
        "unknown model '" + c.model + "'");
  check(c.horizon > 0.0, "T", "T must be positive");
  check(c.n_steps >= 1, "n_steps", "n_steps must be at least 1");
  check(c.n_paths >= 1, "n_paths", "n_paths must be at least 1");
  check(c.x0 > 0.0, "x0", "x0 must be positive for the geometric catalog models");
  check(c.n_particles >= 1, "n_particles", "n_particles must be at least 1");
  check(c.particle_tol > 0.0, "particle_tol", "particle_tol must be positive");
  check(c.particle_max_iters >= 1, "particle_max_iters", "particle_max_iters must be at least 1");
  for (double h : c.h_list) check(h > 0.0, "h_list", "every h in h_list must be positive");
  for (const auto& m : c.methods) check(kMethods.contains(m), "methods", "unknown method '" + m + "'");
}

}  // namespace

void validate_config(const RunConfig& c) {
  check_ranges(c, [](const char*, const std::string& message) { fail(ErrorCode::config_parse, message); });
}

ParsedConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(ErrorCode::config_parse, where(source, e.mark) + ": " + e.msg);
  }
  ParsedConfig parsed;
  RunConfig& c = parsed.config;
  if (root.IsNull()) {
    parsed.notes.push_back("empty config; every field takes its default");
    root = YAML::Node(YAML::NodeType::Map);
  } else if (!root.IsMap()) {
    parse_error(source, root, "top level must be a mapping");
  }

  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string key = read<std::string>(source, "key", it->first);
    if (!kKeys.contains(key)) parse_error(source, it->first, "unknown key '" + key + "'");
  }

  auto node = [&](const char* key) { return root[key]; };

  if (auto n = node("model")) c.model = read<std::string>(source, "model", n);
  if (auto n = node("params")) {
    if (!n.IsMap()) parse_error(source, n, "'params' must be a mapping");
    c.params = Parameters{};
    for (auto it = n.begin(); it != n.end(); ++it) {
      const auto name = read<std::string>(source, "params", it->first);
      if (!it->second.IsScalar()) parse_error(source, it->second, "parameter '" + name + "' must be a scalar");
      double value = 0.0;
      if (YAML::convert<double>::decode(it->second, value)) {
        c.params.set(name, value);
      } else {
        c.params.set_option(name, it->second.Scalar());
      }
    }
  }
  if (auto n = node("payoff")) {
    try {
      c.payoff = parse_payoff_kind(read<std::string>(source, "payoff", n));
    } catch (const Error& e) {
      parse_error(source, n, e.what());
    }
  }
  if (auto n = node("K")) c.strike = read<double>(source, "K", n);
  if (auto n = node("x0")) c.x0 = read<double>(source, "x0", n);
  if (auto n = node("T")) c.horizon = read<double>(source, "T", n);
  if (auto n = node("n_steps")) c.n_steps = read_count(source, "n_steps", n);
  if (auto n = node("n_paths")) {
    c.n_paths = read_count(source, "n_paths", n);
  } else {
    parsed.notes.push_back("n_paths not set; using " + std::to_string(c.n_paths));
  }
  if (auto n = node("seed")) c.seed = read<std::uint64_t>(source, "seed", n);
  if (auto n = node("methods")) {
    if (!n.IsSequence()) parse_error(source, n, "'methods' must be a list");
    c.methods.clear();
    for (const auto& m : n) {
      const auto name = read<std::string>(source, "methods", m);
      if (!kMethods.contains(name)) parse_error(source, m, "unknown method '" + name + "'");
      c.methods.push_back(name);
    }
  }
  if (auto n = node("h_list")) {
    if (!n.IsSequence()) parse_error(source, n, "'h_list' must be a list");
    c.h_list.clear();
    for (const auto& h : n) {
      c.h_list.push_back(read<double>(source, "h_list", h));
      if (c.h_list.back() <= 0.0) parse_error(source, h, "h must be positive");
    }
  }
  if (auto n = node("fd_scheme")) {
    c.fd_scheme = read_choice<FdScheme>(source, "fd_scheme", n,
                                        {{"central", FdScheme::central}, {"forward", FdScheme::forward}});
  }
  if (auto n = node("crn")) c.crn = read<bool>(source, "crn", n);
  if (auto n = node("resolver")) {
    c.resolver = read_choice<CurveResolver>(
        source, "resolver", n, {{"analytic", CurveResolver::analytic}, {"particle", CurveResolver::particle}});
  }
  if (auto n = node("n_particles")) c.n_particles = read_count(source, "n_particles", n);
  if (auto n = node("particle_tol")) c.particle_tol = read<double>(source, "particle_tol", n);
  if (auto n = node("particle_max_iters")) c.particle_max_iters = read_count(source, "particle_max_iters", n);
  if (auto n = node("log_euler")) c.log_euler = read<bool>(source, "log_euler", n);
  if (auto n = node("generic_weight")) c.generic_weight = read<bool>(source, "generic_weight", n);
  if (auto n = node("dump_paths")) c.dump_paths = read_count(source, "dump_paths", n);
  if (auto n = node("record_wall_time")) c.record_wall_time = read<bool>(source, "record_wall_time", n);
  if (auto n = node("dividend_convention")) {
    c.dividend_convention = read_choice<DividendConvention>(
        source, "dividend_convention", n,
        {{"risk_neutral", DividendConvention::risk_neutral}, {"literal", DividendConvention::literal}});
  }
  if (auto n = node("output")) c.output = read<std::string>(source, "output", n);
  if (auto n = node("threads")) c.threads = static_cast<unsigned>(read_count(source, "threads", n));

  check_ranges(c, [&](const char* key, const std::string& message) {
    if (auto n = node(key)) parse_error(source, n, message);
    fail(ErrorCode::config_parse, source + ": " + message);
  });
  return parsed;
}

ParsedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::config_parse, "cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << std::setprecision(17) << std::boolalpha;
  auto list = [&out](const auto& values) {
    out << '[';
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << values[i];
    out << "]\n";
  };
  out << "model: " << c.model << '\n';
  out << "params:";
  if (c.params.values().empty() && c.params.options().empty()) out << " {}";
  out << '\n';
  for (const auto& [name, value] : c.params.values()) out << "  " << name << ": " << value << '\n';
  for (const auto& [name, value] : c.params.options()) out << "  " << name << ": " << value << '\n';
  out << "payoff: " << to_string(c.payoff) << '\n';
  out << "K: " << c.strike << '\n';
  out << "x0: " << c.x0 << '\n';
  out << "T: " << c.horizon << '\n';
  out << "n_steps: " << c.n_steps << '\n';
  out << "n_paths: " << c.n_paths << '\n';
  out << "seed: " << c.seed << '\n';
  out << "methods: ";
  list(c.methods);
  out << "h_list: ";
  list(c.h_list);
  out << "fd_scheme: " << to_string(c.fd_scheme) << '\n';
  out << "crn: " << c.crn << '\n';
  out << "resolver: " << to_string(c.resolver) << '\n';
  out << "n_particles: " << c.n_particles << '\n';
  out << "particle_tol: " << c.particle_tol << '\n';
  out << "particle_max_iters: " << c.particle_max_iters << '\n';
  out << "log_euler: " << c.log_euler << '\n';
  out << "generic_weight: " << c.generic_weight << '\n';
  out << "dump_paths: " << c.dump_paths << '\n';
  out << "record_wall_time: " << c.record_wall_time << '\n';
  out << "dividend_convention: " << to_string(c.dividend_convention) << '\n';
  out << "output: \"" << c.output << "\"\n";
  out << "threads: " << c.threads << '\n';
  return out.str();
}

}  // namespace mfbel
