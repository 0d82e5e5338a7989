#include "tvf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "tvf/exprlang.hpp"

namespace tvf::config {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_comment(std::string_view line) {
  const std::size_t pos = line.find_first_of("#;");
  return std::string(pos == std::string_view::npos ? line : line.substr(0, pos));
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, std::string origin) {
  ConfigFile file;
  file.origin = std::move(origin);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string line = trim(strip_comment(text.substr(start, end - start)));
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = file.origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_name(name)) throw ConfigError(where + "invalid section name '" + name + "'");
      file.sections.push_back({name, line_no, {}});
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
      if (file.sections.empty()) throw ConfigError(where + "key outside of any section");
      Entry entry{trim(std::string_view(line).substr(0, eq)),
                  trim(std::string_view(line).substr(eq + 1)), line_no};
      if (!valid_name(entry.key)) throw ConfigError(where + "invalid key '" + entry.key + "'");
      if (entry.value.empty()) throw ConfigError(where + "empty value for '" + entry.key + "'");
      file.sections.back().entries.push_back(std::move(entry));
    }
    if (end == text.size()) break;
  }
  return file;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": file not found or unreadable");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

bool BuildResult::ok() const {
  return scenario.has_value() &&
         std::none_of(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string format(const Diagnostic& d) {
  return std::string(d.severity == Severity::Error ? "error: " : "warning: ") + d.message;
}

namespace {

// Typed access to one section with located diagnostics.
class SectionReader {
 public:
  SectionReader(const ConfigFile& file, const Section& section, std::vector<Diagnostic>& diags)
      : file_(file), section_(section), diags_(diags) {
    std::set<std::string> seen;
    for (const auto& e : section_.entries) {
      if (!seen.insert(e.key).second) error_at(e, "duplicate key");
    }
  }

  void error(const std::string& message) {
    diags_.push_back({Severity::Error, file_.origin + ":" + std::to_string(section_.line) + ": [" +
                                           section_.name + "] " + message});
    failed_ = true;
  }
  void error_at(const Entry& e, const std::string& message) {
    diags_.push_back({Severity::Error, location(e) + message});
    failed_ = true;
  }
  void warning_at(const Entry& e, const std::string& message) {
    diags_.push_back({Severity::Warning, location(e) + message});
  }

  const Entry* find(const std::string& key) {
    used_.insert(key);
    for (const auto& e : section_.entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }

  std::optional<expr::Expr> expression(const std::string& key, bool required = true) {
    const Entry* e = find(key);
    if (!e) {
      if (required) error("missing required key '" + key + "'");
      return std::nullopt;
    }
    try {
      return expr::parse(e->value);
    } catch (const expr::ParseError& ex) {
      error_at(*e, std::string(ex.kind() == expr::ParseErrorKind::UnknownIdentifier
                                   ? "unknown identifier"
                                   : "syntax error") +
                       " at offset " + std::to_string(ex.offset()) + ": " + ex.what());
      return std::nullopt;
    }
  }

  std::optional<double> number(const std::string& key, std::optional<double> fallback) {
    const Entry* e = find(key);
    if (!e) {
      if (!fallback) error("missing required key '" + key + "'");
      return fallback;
    }
    try {
      const expr::Expr ex = expr::parse(e->value);
      if (ex.depends_on_time()) {
        error_at(*e, "must be a constant, not a function of t");
        return std::nullopt;
      }
      return ex.eval(0.0);
    } catch (const expr::ParseError& ex) {
      error_at(*e, "syntax error at offset " + std::to_string(ex.offset()) + ": " + ex.what());
    } catch (const expr::EvalError& ex) {
      error_at(*e, std::string("evaluation error: ") + ex.what());
    }
    return std::nullopt;
  }

  std::optional<std::array<double, fuzzy::kLabels>> number_list(const std::string& key) {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    std::array<double, fuzzy::kLabels> out{};
    std::size_t n = 0;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string tok = trim(item);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || n >= out.size()) {
        error_at(*e, "expected " + std::to_string(fuzzy::kLabels) + " comma-separated numbers");
        return std::nullopt;
      }
      out[n++] = v;
    }
    if (n != out.size()) {
      error_at(*e, "expected " + std::to_string(fuzzy::kLabels) + " comma-separated numbers");
      return std::nullopt;
    }
    return out;
  }

  std::optional<std::string> word(const std::string& key) {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return e->value;
  }

  void report_unknown_keys() {
    for (const auto& e : section_.entries) {
      if (!used_.count(e.key)) error_at(e, "unknown key '" + e.key + "'");
    }
  }

  bool failed() const { return failed_; }
  const Section& section() const { return section_; }

 private:
  std::string location(const Entry& e) const {
    return file_.origin + ":" + std::to_string(e.line) + ": [" + section_.name + "] " + e.key +
           ": ";
  }

  const ConfigFile& file_;
  const Section& section_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> used_;
  bool failed_ = false;
};

std::pair<std::string, std::string> split_section(const std::string& name) {
  const std::size_t dot = name.find('.');
  if (dot == std::string::npos) return {name, ""};
  return {name.substr(0, dot), name.substr(dot + 1)};
}

void check_expression_range(SectionReader& r, const std::string& key, const expr::Expr& ex,
                            double horizon) {
  constexpr int kSamples = 1001;
  for (int i = 0; i < kSamples; ++i) {
    const double t = horizon * i / (kSamples - 1);
    try {
      ex.eval(t);
    } catch (const expr::EvalError& err) {
      if (const Entry* e = r.find(key)) {
        r.error_at(*e, std::string("evaluation error at t = ") + std::to_string(t) + ": " +
                           err.what());
      }
      return;
    }
  }
}

void check_rate(SectionReader& r, const std::string& value_key, const expr::Expr& value,
                const std::string& rate_key, const expr::Expr& rate, double horizon) {
  try {
    const double span = std::max(horizon, 1.0);
    const expr::RateConsistency rc = expr::check_rate_consistency(value, rate, 0.0, span);
    if (rc.relative > kRateTolerance) {
      std::ostringstream msg;
      msg << rate_key << " does not match the derivative of " << value_key
          << " (relative deviation " << rc.relative << " at t = " << rc.worst_t << ")";
      if (const Entry* e = r.find(rate_key)) r.warning_at(*e, msg.str());
    }
  } catch (const expr::EvalError&) {
    // Already reported by the range check.
  }
}

}  // namespace

BuildResult build_scenario(const ConfigFile& file, bool deep_checks) {
  BuildResult result;
  auto& diags = result.diagnostics;
  sim::Scenario sc;
  bool failed = false;

  const Section* leader = nullptr;
  const Section* simsec = nullptr;
  const Section* fuzzysec = nullptr;
  std::map<std::string, const Section*> followers;
  std::map<std::string, const Section*> formations;
  std::map<std::string, const Section*> controllers;
  std::vector<std::string> follower_order;

  auto fail_section = [&](const Section& s, const std::string& msg) {
    diags.push_back({Severity::Error,
                     file.origin + ":" + std::to_string(s.line) + ": [" + s.name + "] " + msg});
    failed = true;
  };
  auto claim_unique = [&](const Section*& slot, const Section& s) {
    if (slot) fail_section(s, "section appears more than once");
    slot = &s;
  };
  auto claim_named = [&](std::map<std::string, const Section*>& m, const Section& s,
                         const std::string& name) {
    if (name.empty()) {
      fail_section(s, "section needs a name, e.g. [" + s.name + ".f1]");
      return false;
    }
    if (!m.emplace(name, &s).second) {
      fail_section(s, "section appears more than once");
      return false;
    }
    return true;
  };

  for (const auto& s : file.sections) {
    const auto [kind, name] = split_section(s.name);
    if (kind == "leader" && name.empty()) {
      claim_unique(leader, s);
    } else if (kind == "sim" && name.empty()) {
      claim_unique(simsec, s);
    } else if (kind == "fuzzy" && name.empty()) {
      claim_unique(fuzzysec, s);
    } else if (kind == "follower") {
      if (name == "l") {
        fail_section(s, "follower name 'l' is reserved for the leader");
      } else if (claim_named(followers, s, name)) {
        follower_order.push_back(name);
      }
    } else if (kind == "formation") {
      claim_named(formations, s, name);
    } else if (kind == "controller") {
      claim_named(controllers, s, name);
    } else {
      fail_section(s, "unknown section");
    }
  }
  if (!leader) {
    diags.push_back({Severity::Error, file.origin + ": missing [leader] section"});
    failed = true;
  }
  if (!simsec) {
    diags.push_back({Severity::Error, file.origin + ": missing [sim] section"});
    failed = true;
  }
  if (followers.empty()) {
    diags.push_back({Severity::Error, file.origin + ": no [follower.<name>] section"});
    failed = true;
  }
  for (const auto& [name, s] : formations) {
    if (!followers.count(name)) fail_section(*s, "no matching [follower." + name + "]");
  }
  for (const auto& [name, s] : controllers) {
    if (!followers.count(name)) fail_section(*s, "no matching [follower." + name + "]");
  }

  if (simsec) {
    SectionReader r(file, *simsec, diags);
    const auto dt = r.number("dt", 1e-3);
    const auto horizon = r.number("horizon", std::nullopt);
    const auto c = r.number("c", 0.1);
    const auto wr = r.number("wheel_radius", 0.05);
    const auto tw = r.number("track_width", 0.2);
    r.report_unknown_keys();
    if (dt) {
      if (*dt > 0.0) sc.dt = *dt;
      else r.error_at(*r.find("dt"), "dt must be positive");
    }
    if (horizon) {
      if (*horizon >= 0.0) sc.horizon = *horizon;
      else r.error_at(*r.find("horizon"), "horizon must be non-negative");
    }
    if (c) {
      if (*c > 0.0) sc.geometry.c = *c;
      else if (const Entry* e = r.find("c")) r.error_at(*e, "offset c must be positive");
    }
    if (wr) {
      if (*wr > 0.0) sc.geometry.wheel_radius = *wr;
      else r.error_at(*r.find("wheel_radius"), "wheel_radius must be positive");
    }
    if (tw) {
      if (*tw > 0.0) sc.geometry.track_width = *tw;
      else r.error_at(*r.find("track_width"), "track_width must be positive");
    }
    failed |= r.failed();
  }

  if (fuzzysec) {
    SectionReader r(file, *fuzzysec, diags);
    auto& fz = sc.fuzzy;
    fz.error_scale = r.number("error_scale", fz.error_scale).value_or(fz.error_scale);
    fz.rate_scale = r.number("rate_scale", fz.rate_scale).value_or(fz.rate_scale);
    fz.kappa_min = r.number("kappa_min", fz.kappa_min).value_or(fz.kappa_min);
    fz.kappa_max = r.number("kappa_max", fz.kappa_max).value_or(fz.kappa_max);
    if (auto peaks = r.number_list("input_peaks")) fz.input_peaks = *peaks;
    if (auto peaks = r.number_list("output_peaks")) fz.output_peaks = *peaks;
    if (auto w = r.word("k1_rate_input")) {
      if (*w == "heading") {
        fz.k1_rate_input = fuzzy::K1RateInput::Heading;
      } else if (*w == "longitudinal") {
        fz.k1_rate_input = fuzzy::K1RateInput::Longitudinal;
      } else {
        r.error_at(*r.find("k1_rate_input"), "expected 'heading' or 'longitudinal'");
      }
    }
    r.report_unknown_keys();
    failed |= r.failed();
    if (!r.failed()) {
      try {
        fuzzy::GainTuner probe(fz);
      } catch (const std::invalid_argument& ex) {
        r.error(ex.what());
        failed = true;
      }
    }
  }

  if (leader) {
    SectionReader r(file, *leader, diags);
    const auto x = r.number("x", 0.0);
    const auto y = r.number("y", 0.0);
    const auto th = r.number("theta", 0.0);
    auto v = r.expression("v");
    auto w = r.expression("omega");
    r.report_unknown_keys();
    if (deep_checks && simsec) {
      if (v) check_expression_range(r, "v", *v, sc.horizon);
      if (w) check_expression_range(r, "omega", *w, sc.horizon);
    }
    failed |= r.failed();
    if (!r.failed()) {
      sc.leader = sim::LeaderSpec{{*x, *y, *th}, *v, *w};
    }
  }

  for (const auto& name : follower_order) {
    sim::FollowerSpec f;
    f.name = name;
    {
      SectionReader r(file, *followers.at(name), diags);
      const auto x = r.number("x", std::nullopt);
      const auto y = r.number("y", std::nullopt);
      const auto th = r.number("theta", std::nullopt);
      r.report_unknown_keys();
      failed |= r.failed();
      if (!r.failed()) f.initial = {*x, *y, *th};
    }
    const auto fit = formations.find(name);
    if (fit == formations.end()) {
      fail_section(*followers.at(name), "missing [formation." + name + "] section");
    } else {
      SectionReader r(file, *fit->second, diags);
      auto l = r.expression("l");
      auto l_rate = r.expression("l_rate");
      auto alpha = r.expression("alpha");
      auto alpha_rate = r.expression("alpha_rate");
      r.report_unknown_keys();
      if (deep_checks && simsec) {
        const std::pair<const char*, std::optional<expr::Expr>*> all[] = {
            {"l", &l}, {"l_rate", &l_rate}, {"alpha", &alpha}, {"alpha_rate", &alpha_rate}};
        for (const auto& [key, ex] : all) {
          if (*ex) check_expression_range(r, key, **ex, sc.horizon);
        }
        if (!r.failed()) {
          check_rate(r, "l", *l, "l_rate", *l_rate, sc.horizon);
          check_rate(r, "alpha", *alpha, "alpha_rate", *alpha_rate, sc.horizon);
        }
      }
      failed |= r.failed();
      if (!r.failed()) f.formation = {*l, *l_rate, *alpha, *alpha_rate};
    }
    const auto cit = controllers.find(name);
    if (cit != controllers.end()) {
      SectionReader r(file, *cit->second, diags);
      if (auto kind = r.word("kind")) {
        if (*kind == "bc") {
          f.kind = sim::ControllerKind::Backstepping;
        } else if (*kind == "fabc") {
          f.kind = sim::ControllerKind::FuzzyAdaptive;
        } else {
          r.error_at(*r.find("kind"), "expected 'bc' or 'fabc'");
        }
      }
      const auto k1 = r.number("k1", 3.0);
      const auto k2 = r.number("k2", 3.0);
      const auto k3 = r.number("k3", 4.0);
      const auto max_v = r.number("max_v", std::numeric_limits<double>::quiet_NaN());
      const auto max_w = r.number("max_omega", std::numeric_limits<double>::quiet_NaN());
      r.report_unknown_keys();
      if (k1 && k2 && k3) {
        if (!(*k1 > 0.0 && *k2 > 0.0 && *k3 > 0.0)) {
          r.error("controller gains must be positive");
        } else {
          f.k1 = *k1;
          f.k2 = *k2;
          f.k3 = *k3;
        }
      }
      auto limit = [&](const std::optional<double>& v, const char* key,
                       std::optional<double>& slot) {
        if (!v || std::isnan(*v)) return;
        if (*v > 0.0) slot = *v;
        else r.error_at(*r.find(key), "command limits must be positive");
      };
      limit(max_v, "max_v", f.limits.max_v);
      limit(max_w, "max_omega", f.limits.max_omega);
      failed |= r.failed();
    }
    sc.followers.push_back(std::move(f));
  }

  if (!failed) {
    try {
      sc.validate();
      result.scenario = std::move(sc);
    } catch (const std::invalid_argument& ex) {
      diags.push_back({Severity::Error, file.origin + ": " + ex.what()});
    }
  }
  return result;
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
  BuildResult r = build_scenario(ConfigFile::load(path), false);
  for (const auto& d : r.diagnostics) {
    if (d.severity == Severity::Error) throw ConfigError(d.message);
  }
  if (!r.scenario) throw ConfigError(path.string() + ": invalid scenario");
  return std::move(*r.scenario);
}

}  // namespace tvf::config
