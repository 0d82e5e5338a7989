#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "tvf/config.hpp"

using namespace tvf;
using namespace tvf::config;

namespace {

const char* kBase = R"(# minimal scenario
[sim]
horizon = 2

[leader]
v = 0.02
omega = 0

[follower.f]
x = 0.4
y = -0.18
theta = pi/2

[formation.f]
l = 0.08*sin(0.2*t) + 0.3   ; metres
l_rate = 0.016*cos(0.2*t)
alpha = 3*pi/2
alpha_rate = 0
)";

BuildResult build(const std::string& text) { return build_scenario(ConfigFile::parse(text, "test.cfg")); }

bool has(const BuildResult& r, Severity sev, const std::string& needle) {
  return std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [&](const Diagnostic& d) {
    return d.severity == sev && d.message.find(needle) != std::string::npos;
  });
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos != std::string::npos) text.replace(pos, from.size(), to);
  return text;
}

}  // namespace

TEST(ConfigFile, ParsesSectionsAndComments) {
  const ConfigFile f = ConfigFile::parse(kBase, "x.cfg");
  ASSERT_EQ(f.sections.size(), 4u);
  EXPECT_EQ(f.sections[2].name, "follower.f");
  EXPECT_EQ(f.sections[3].entries[0].value, "0.08*sin(0.2*t) + 0.3");
  EXPECT_EQ(f.sections[3].entries[0].line, 15u);
}

TEST(ConfigFile, MalformedLines) {
  EXPECT_THROW(ConfigFile::parse("[sim\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("dt = 1\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("[sim]\nhorizon\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("[sim]\nhorizon =\n"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("[s m]\n"), ConfigError);
  EXPECT_THROW(ConfigFile::load("/nonexistent/dir/x.cfg"), ConfigError);
}

TEST(BuildScenario, DefaultsApplied) {
  const BuildResult r = build(kBase);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.diagnostics.empty());
  const sim::Scenario& s = *r.scenario;
  EXPECT_EQ(s.dt, 1e-3);
  EXPECT_EQ(s.geometry.c, 0.1);
  EXPECT_EQ(s.followers.front().kind, sim::ControllerKind::Backstepping);
  EXPECT_EQ(s.followers.front().k3, 4.0);
  EXPECT_EQ(s.fuzzy.rate_scale, 20.0);
  EXPECT_NEAR(s.followers.front().initial.theta, 1.5707963267948966, 1e-15);
}

TEST(BuildScenario, ShippedFilesAreClean) {
  for (const char* name : {"case_a.cfg", "case_b.cfg"}) {
    const BuildResult r =
        build_scenario(ConfigFile::load(std::string(TVF_SCENARIO_DIR) + "/" + name));
    EXPECT_TRUE(r.ok()) << name;
    EXPECT_TRUE(r.diagnostics.empty()) << name;
  }
}

TEST(BuildScenario, NonPositiveGain) {
  const BuildResult r = build(std::string(kBase) + "\n[controller.f]\nk2 = 0\n");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r, Severity::Error, "controller gains must be positive"));
}

TEST(BuildScenario, NonPositiveOffset) {
  const BuildResult r = build(replace(kBase, "horizon = 2", "horizon = 2\nc = 0"));
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r, Severity::Error, "offset c must be positive"));
}

TEST(BuildScenario, PerturbedRateWarns) {
  const BuildResult r = build(replace(kBase, "0.016*cos", "0.01616*cos"));
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(has(r, Severity::Warning, "l_rate does not match"));
  const BuildResult shallow =
      build_scenario(ConfigFile::parse(replace(kBase, "0.016*cos", "0.01616*cos")), false);
  EXPECT_TRUE(shallow.diagnostics.empty());
}

TEST(BuildScenario, ExpressionErrorsAreLocated) {
  const BuildResult r = build(replace(kBase, "alpha = 3*pi/2", "alpha = 3*pi/"));
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r, Severity::Error, "[formation.f] alpha: syntax error at offset 5"));
  const BuildResult u = build(replace(kBase, "v = 0.02", "v = 0.02*s"));
  EXPECT_TRUE(has(u, Severity::Error, "[leader] v: unknown identifier at offset 5"));
}

TEST(BuildScenario, EvaluationErrorOverHorizon) {
  const BuildResult r = build(replace(kBase, "omega = 0", "omega = 1/(t-1)"));
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r, Severity::Error, "evaluation error at t = 1"));
}

TEST(BuildScenario, StructuralErrors) {
  EXPECT_TRUE(has(build(std::string(kBase) + "[extra]\n"), Severity::Error, "unknown section"));
  EXPECT_TRUE(has(build(std::string(kBase) + "[follower.l]\nx=0\ny=0\ntheta=0\n"), Severity::Error,
                  "reserved"));
  EXPECT_TRUE(has(build(replace(kBase, "x = 0.4", "x = 0.4\nz = 1")), Severity::Error,
                  "unknown key 'z'"));
  EXPECT_TRUE(has(build(replace(kBase, "x = 0.4", "")), Severity::Error,
                  "missing required key 'x'"));
  EXPECT_TRUE(has(build(replace(kBase, "horizon = 2", "dt = 0.001")), Severity::Error,
                  "missing required key 'horizon'"));
  EXPECT_TRUE(has(build(replace(kBase, "x = 0.4", "x = t")), Severity::Error, "must be a constant"));
  EXPECT_TRUE(has(build(std::string(kBase) + "[formation.g]\nl=1\n"), Severity::Error,
                  "no matching [follower.g]"));
  EXPECT_TRUE(has(build(replace(kBase, "[formation.f]", "[formation.f]\nl = 2")), Severity::Error,
                  "duplicate key"));
  EXPECT_TRUE(has(build(std::string(kBase) + "[controller.f]\nkind = pid\n"), Severity::Error,
                  "expected 'bc' or 'fabc'"));
}

TEST(BuildScenario, ReportsEveryProblem) {
  std::string text = replace(kBase, "x = 0.4", "x = foo");
  text = replace(text, "alpha_rate = 0", "alpha_rate = (");
  const BuildResult r = build(text);
  EXPECT_GE(std::count_if(r.diagnostics.begin(), r.diagnostics.end(),
                          [](const Diagnostic& d) { return d.severity == Severity::Error; }),
            2);
}

TEST(BuildScenario, FuzzyAndControllerSections) {
  const BuildResult r = build(std::string(kBase) +
                              "[fuzzy]\nrate_scale = 10\nkappa_max = 4\n"
                              "input_peaks = -2, -1, 0, 1, 2\nk1_rate_input = longitudinal\n"
                              "[controller.f]\nkind = fabc\nk1 = 2\nmax_omega = 3\n");
  ASSERT_TRUE(r.ok());
  const sim::Scenario& s = *r.scenario;
  EXPECT_EQ(s.fuzzy.rate_scale, 10.0);
  EXPECT_EQ(s.fuzzy.kappa_max, 4.0);
  EXPECT_EQ(s.fuzzy.input_peaks[0], -2.0);
  EXPECT_EQ(s.fuzzy.k1_rate_input, fuzzy::K1RateInput::Longitudinal);
  EXPECT_EQ(s.followers.front().kind, sim::ControllerKind::FuzzyAdaptive);
  EXPECT_EQ(s.followers.front().k1, 2.0);
  EXPECT_EQ(*s.followers.front().limits.max_omega, 3.0);
  EXPECT_FALSE(s.followers.front().limits.max_v.has_value());

  EXPECT_TRUE(has(build(std::string(kBase) + "[fuzzy]\nkappa_min = 0\n"), Severity::Error,
                  "kappa_min"));
  EXPECT_TRUE(has(build(std::string(kBase) + "[fuzzy]\ninput_peaks = 1, 2\n"), Severity::Error,
                  "comma-separated"));
}

TEST(LoadScenario, ThrowsOnFirstError) {
  EXPECT_THROW(load_scenario("/nonexistent.cfg"), ConfigError);
  EXPECT_NO_THROW(load_scenario(std::string(TVF_SCENARIO_DIR) + "/case_b.cfg"));
}

TEST(Format, Prefixes) {
  EXPECT_EQ(format({Severity::Error, "a"}), "error: a");
  EXPECT_EQ(format({Severity::Warning, "b"}), "warning: b");
}
