#include "chstab_app/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/sha.h>

#include <chstab/errors.hpp>

namespace chstab::app {

namespace pt = boost::property_tree;

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::spectrum: return "spectrum";
    case RunMode::synth: return "synth";
    case RunMode::simulate_linear: return "simulate-linear";
    case RunMode::simulate_nonlinear: return "simulate-nonlinear";
    case RunMode::verify: return "verify";
  }
  return "?";
}

RunMode parse_run_mode(std::string_view text) {
  for (RunMode m : {RunMode::spectrum, RunMode::synth, RunMode::simulate_linear,
                    RunMode::simulate_nonlinear, RunMode::verify}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown run mode '" + std::string(text) + "'");
}

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"domain", {"kind", "length", "lx", "ly", "gamma1"}},
      {"physics", {"nu", "l0", "gamma0", "phi_inf", "phi_inf_table", "theta_inf"}},
      {"discretization", {"k", "dt", "t_final", "dt_nonlinear", "t_final_nonlinear"}},
      {"synthesis", {"eta1", "delta", "convention", "override_assumptions", "zero_gain"}},
      {"run", {"mode", "seed", "initial", "initial_file", "amplitude", "controlled"}},
  };
  return keys;
}

std::string where(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

double to_double(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string s = boost::trim_copy(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(where(section, key) + ": expected a finite number, got '" + raw + "'");
  }
  return v;
}

long long to_integer(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string s = boost::trim_copy(raw);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(where(section, key) + ": expected an integer, got '" + raw + "'");
  }
  return v;
}

bool to_bool(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string s = boost::to_lower_copy(boost::trim_copy(raw));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(where(section, key) + ": expected true or false, got '" + raw + "'");
}

double positive(const std::string& section, const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(where(section, key) + " must be positive");
  return v;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& raw) {
  std::filesystem::path p(boost::trim_copy(raw));
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

InitialSpec parse_initial(const std::string& raw) {
  const std::string s = boost::trim_copy(raw);
  InitialSpec spec;
  if (s == "random-mass-matched") {
    spec.kind = InitialKind::random_mass_matched;
  } else if (s == "file") {
    spec.kind = InitialKind::file;
  } else if (s.rfind("eigvec(", 0) == 0 && s.size() > 8 && s.back() == ')') {
    spec.kind = InitialKind::eigvec;
    spec.eigvec_index =
        static_cast<int>(to_integer("run", "initial", s.substr(7, s.size() - 8)));
    if (spec.eigvec_index < 1) throw ConfigError("[run] initial: eigvec index is 1-based");
  } else {
    throw ConfigError("[run] initial: expected random-mass-matched, eigvec(j) or file, got '" +
                      raw + "'");
  }
  return spec;
}

std::string hex(const unsigned char* data, size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (size_t i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

}  // namespace

int ScenarioConfig::modes() const {
  if (k > 0) return k;
  return domain_kind == DomainKind::interval ? 32 : 64;
}

Domain ScenarioConfig::domain() const {
  return domain_kind == DomainKind::interval ? Domain::interval(length, gamma1)
                                             : Domain::rectangle(lx, ly, gamma1);
}

Json ScenarioConfig::canonical() const {
  Json sides = Json::array();
  for (Side s : gamma1) sides.push_back(std::string(to_string(s)));
  Json domain_j{{"kind", std::string(to_string(domain_kind))}};
  if (domain_kind == DomainKind::interval) {
    domain_j["length"] = length;
  } else {
    domain_j["lx"] = lx;
    domain_j["ly"] = ly;
  }
  domain_j["gamma1"] = sides;

  Json physics{{"nu", nu}, {"l0", l0}, {"gamma0", gamma0}, {"theta_inf", theta_inf}};
  if (phi_inf_table) {
    physics["phi_inf_table"] = phi_inf_table->string();
  } else {
    physics["phi_inf"] = phi_inf;
  }

  Json synthesis{{"convention", convention.name()},
                 {"override_assumptions", override_assumptions},
                 {"zero_gain", zero_gain}};
  synthesis["eta1"] = eta1 ? Json(*eta1) : Json(nullptr);
  synthesis["delta"] = delta ? Json(*delta) : Json(nullptr);

  Json run{{"mode", std::string(to_string(mode))}, {"seed", seed}, {"controlled", controlled}};
  switch (initial.kind) {
    case InitialKind::random_mass_matched: run["initial"] = "random-mass-matched"; break;
    case InitialKind::eigvec: run["initial"] = "eigvec(" + std::to_string(initial.eigvec_index) + ")"; break;
    case InitialKind::file:
      run["initial"] = "file";
      run["initial_file"] = initial.file.string();
      break;
  }
  run["amplitude"] = initial.amplitude ? Json(*initial.amplitude) : Json(nullptr);

  return Json{{"domain", std::move(domain_j)},
              {"physics", std::move(physics)},
              {"discretization", {{"k", modes()},
                                  {"dt", dt},
                                  {"t_final", t_final},
                                  {"dt_nonlinear", dt_nonlinear},
                                  {"t_final_nonlinear", t_final_nonlinear}}},
              {"synthesis", std::move(synthesis)},
              {"run", std::move(run)}};
}

std::string ScenarioConfig::hash() const {
  const std::string text = canonical().dump();
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest.data());
  return hex(digest.data(), digest.size()).substr(0, 16);
}

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [section, body] : tree) {
    const auto it = allowed_keys().find(section);
    if (it == allowed_keys().end() || body.data().size() > 0) {
      throw ConfigError("config: unknown section or top-level key '" + section + "'");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("config: unknown key " + where(section, key));
    }
  }
  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto sec = tree.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  };

  ScenarioConfig c;

  const std::string kind = boost::trim_copy(get("domain", "kind").value_or("interval"));
  if (kind == "interval") {
    c.domain_kind = DomainKind::interval;
    const auto len = get("domain", "length");
    if (!len) throw ConfigError("[domain] length is required for an interval");
    if (get("domain", "lx") || get("domain", "ly")) {
      throw ConfigError("[domain] lx/ly apply to rectangles only");
    }
    c.length = positive("domain", "length", to_double("domain", "length", *len));
  } else if (kind == "rectangle") {
    c.domain_kind = DomainKind::rectangle;
    const auto lx = get("domain", "lx");
    const auto ly = get("domain", "ly");
    if (!lx || !ly) throw ConfigError("[domain] lx and ly are required for a rectangle");
    if (get("domain", "length")) throw ConfigError("[domain] length applies to intervals only");
    c.lx = positive("domain", "lx", to_double("domain", "lx", *lx));
    c.ly = positive("domain", "ly", to_double("domain", "ly", *ly));
  } else {
    throw ConfigError("[domain] kind: expected interval or rectangle, got '" + kind + "'");
  }
  const std::string sides = get("domain", "gamma1").value_or("");
  std::vector<std::string> parts;
  boost::split(parts, sides, boost::is_any_of(","));
  for (std::string& s : parts) {
    boost::trim(s);
    if (!s.empty()) c.gamma1.push_back(parse_side(s));
  }
  if (c.gamma1.empty()) throw ConfigError("[domain] gamma1 must name at least one side");

  if (auto v = get("physics", "nu")) c.nu = positive("physics", "nu", to_double("physics", "nu", *v));
  if (auto v = get("physics", "l0")) c.l0 = positive("physics", "l0", to_double("physics", "l0", *v));
  if (auto v = get("physics", "gamma0")) {
    c.gamma0 = positive("physics", "gamma0", to_double("physics", "gamma0", *v));
  }
  const auto phi = get("physics", "phi_inf");
  const auto table = get("physics", "phi_inf_table");
  if (phi && table) throw ConfigError("[physics] phi_inf and phi_inf_table are exclusive");
  if (phi) c.phi_inf = to_double("physics", "phi_inf", *phi);
  if (table) {
    c.phi_inf_table = resolve(base_dir, *table);
    if (!std::filesystem::is_regular_file(*c.phi_inf_table)) {
      throw ConfigError("[physics] phi_inf_table: no such file " + c.phi_inf_table->string());
    }
  }
  if (auto v = get("physics", "theta_inf")) c.theta_inf = to_double("physics", "theta_inf", *v);

  if (auto v = get("discretization", "k")) {
    const long long k = to_integer("discretization", "k", *v);
    if (k < 2 || k > 512) throw ConfigError("[discretization] k must be in [2, 512]");
    c.k = static_cast<int>(k);
  }
  if (auto v = get("discretization", "dt")) c.dt = positive("discretization", "dt", to_double("discretization", "dt", *v));
  if (auto v = get("discretization", "t_final")) {
    c.t_final = positive("discretization", "t_final", to_double("discretization", "t_final", *v));
  }
  if (auto v = get("discretization", "dt_nonlinear")) {
    c.dt_nonlinear = positive("discretization", "dt_nonlinear", to_double("discretization", "dt_nonlinear", *v));
  }
  if (auto v = get("discretization", "t_final_nonlinear")) {
    c.t_final_nonlinear = to_double("discretization", "t_final_nonlinear", *v);
    if (c.t_final_nonlinear < 0.0) throw ConfigError("[discretization] t_final_nonlinear must be >= 0");
  }
  if (c.t_final < c.dt) throw ConfigError("[discretization] t_final must be at least dt");

  if (auto v = get("synthesis", "eta1")) c.eta1 = positive("synthesis", "eta1", to_double("synthesis", "eta1", *v));
  if (auto v = get("synthesis", "delta")) c.delta = positive("synthesis", "delta", to_double("synthesis", "delta", *v));
  if (auto v = get("synthesis", "convention")) c.convention = Convention::parse(boost::trim_copy(*v));
  if (auto v = get("synthesis", "override_assumptions")) {
    c.override_assumptions = to_bool("synthesis", "override_assumptions", *v);
  }
  if (auto v = get("synthesis", "zero_gain")) c.zero_gain = to_bool("synthesis", "zero_gain", *v);

  if (auto v = get("run", "mode")) c.mode = parse_run_mode(boost::trim_copy(*v));
  if (auto v = get("run", "seed")) {
    const long long s = to_integer("run", "seed", *v);
    if (s < 0) throw ConfigError("[run] seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("run", "initial")) c.initial = parse_initial(*v);
  const auto file = get("run", "initial_file");
  if (c.initial.kind == InitialKind::file) {
    if (!file) throw ConfigError("[run] initial = file needs initial_file");
    c.initial.file = resolve(base_dir, *file);
    if (!std::filesystem::is_regular_file(c.initial.file)) {
      throw ConfigError("[run] initial_file: no such file " + c.initial.file.string());
    }
  } else if (file) {
    throw ConfigError("[run] initial_file is only used with initial = file");
  }
  if (auto v = get("run", "amplitude")) c.initial.amplitude = positive("run", "amplitude", to_double("run", "amplitude", *v));
  if (auto v = get("run", "controlled")) c.controlled = to_bool("run", "controlled", *v);

  // Surfaces domain validation errors at parse time.
  (void)c.domain();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace chstab::app
