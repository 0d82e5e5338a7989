#include <gtest/gtest.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvf/app.hpp"
#include "tvf/config.hpp"
#include "tvf/csv.hpp"
#include "tvf/sim.hpp"

namespace fs = std::filesystem;
using namespace tvf;

namespace {

std::string scenario(const char* name) { return std::string(TVF_SCENARIO_DIR) + "/" + name; }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = app::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("tvf_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& s) const { return path_ / s; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string read(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// Short copy of a shipped scenario.
fs::path shortened(const TempDir& dir, const char* name, const char* horizon) {
  std::string text = read(scenario(name));
  const auto pos = text.find("horizon = ");
  const auto end = text.find('\n', pos);
  text.replace(pos, end - pos, std::string("horizon = ") + horizon);
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Csv, HeaderLayout) {
  const auto h = csv::header({"f", "g"});
  EXPECT_EQ(h.size(), csv::column_count(2));
  EXPECT_EQ(h.size(), 1u + 3u + 19u * 2u);
  EXPECT_EQ(h[0], "t");
  EXPECT_EQ(h[3], "th_l");
  EXPECT_EQ(h[4], "x_f");
  EXPECT_EQ(h[22], "l_d_f");
  EXPECT_EQ(h[23], "x_g");
}

TEST(Csv, NumbersRoundTripExactly) {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, -123456.789, 5e-324, 0.1 + 0.2}) {
    const std::string s = csv::format_number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
    EXPECT_EQ(s.find(','), std::string::npos);
  }
}

TEST(Csv, TraceParsesBack) {
  sim::Scenario s = config::load_scenario(scenario("case_a.cfg"));
  s.horizon = 0.05;
  const sim::Trace tr = sim::run(s);
  std::ostringstream out;
  csv::write_trace(out, tr);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(split(line), csv::header(tr.names()));
  std::size_t k = 0;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    ASSERT_EQ(cells.size(), csv::column_count(1));
    std::vector<double> v;
    for (const auto& c : cells) {
      double x = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), x);
      ASSERT_EQ(res.ptr, c.data() + c.size()) << c;
      v.push_back(x);
    }
    const sim::FollowerSample& f = tr.sample(k, 0);
    EXPECT_EQ(v[0], tr.time(k));
    EXPECT_EQ(v[2], tr.leader(k).y);
    EXPECT_EQ(v[4], f.pose.x);
    EXPECT_EQ(v[8], f.e_hat.ey_hat);
    EXPECT_EQ(v[13], f.wheels.right);
    EXPECT_EQ(v[16], f.gains.k3);
    EXPECT_EQ(v[20], f.v2);
    EXPECT_EQ(v[22], f.l_desired);
    ++k;
  }
  EXPECT_EQ(k, tr.rows());
  EXPECT_EQ(out.str().find('\r'), std::string::npos);
}

TEST(Cli, ValidateShipped) {
  for (const char* name : {"case_a.cfg", "case_b.cfg"}) {
    const Result r = cli({"validate", scenario(name)});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.err.empty());
  }
}

TEST(Cli, ValidateBadGain) {
  TempDir dir;
  const fs::path p = dir / "bad.cfg";
  std::string text = read(scenario("case_a.cfg"));
  text.replace(text.find("k2 = 3"), 6, "k2 = 0");
  std::ofstream(p) << text;
  const Result r = cli({"validate", p.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("controller gains must be positive"), std::string::npos);
}

TEST(Cli, ValidateRateMismatchWarns) {
  TempDir dir;
  std::string text = read(scenario("case_a.cfg"));
  text.replace(text.find("0.016*cos"), 9, "0.01616*cos");
  const fs::path p = dir / "warn.cfg";
  std::ofstream(p) << text;
  const Result r = cli({"validate", p.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning:"), std::string::npos);
  EXPECT_NE(r.err.find("l_rate"), std::string::npos);
}

TEST(Cli, MissingFile) {
  for (const char* cmd : {"validate", "simulate", "compare"}) {
    const Result r = cli({cmd, "/nonexistent/case.cfg"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("file not found"), std::string::npos) << cmd;
  }
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"simulate", scenario("case_a.cfg"), "--controller", "pid"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, SimulateWritesCsvAndSummary) {
  TempDir dir;
  const fs::path cfg = shortened(dir, "case_b.cfg", "0.5");
  const fs::path out = dir / "b.csv";
  const Result r = cli({"simulate", cfg.string(), "--controller", "fabc", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("k2 == k3 at every step: yes"), std::string::npos);
  EXPECT_NE(r.out.find("settling time"), std::string::npos);
  EXPECT_NE(r.out.find("final error norm"), std::string::npos);
  const std::string text = read(out);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 501);
}

TEST(Cli, SimulateIsDeterministic) {
  TempDir dir;
  const fs::path cfg = shortened(dir, "case_a.cfg", "1");
  ASSERT_EQ(cli({"simulate", cfg.string(), "--out", (dir / "1.csv").string()}).code, 0);
  ASSERT_EQ(cli({"simulate", cfg.string(), "--out", (dir / "2.csv").string()}).code, 0);
  EXPECT_EQ(read(dir / "1.csv"), read(dir / "2.csv"));
}

TEST(Cli, SimulateAbortsOnNonFiniteState) {
  TempDir dir;
  std::string text = read(scenario("case_a.cfg"));
  text.replace(text.find("v = 0.02"), 8, "v = 1e300*exp(700*t)");
  text.replace(text.find("horizon = 120"), 13, "horizon = 1");
  const fs::path p = dir / "blow.cfg";
  std::ofstream(p) << text;
  const Result r = cli({"simulate", p.string(), "--out", (dir / "x.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, CompareWritesReports) {
  TempDir dir;
  const fs::path cfg = shortened(dir, "case_a.cfg", "4");
  const fs::path out = dir / "cmp";
  const Result r = cli({"compare", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"bc.csv", "fabc.csv", "report.txt", "report.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto j = nlohmann::json::parse(read(out / "report.json"));
  const auto& f = j.at("followers").at(0);
  EXPECT_EQ(f.at("name"), "f");
  EXPECT_GE(f.at("left_decrease").get<double>(), 30.0);
  EXPECT_GE(f.at("right_decrease").get<double>(), 30.0);
  EXPECT_TRUE(f.at("bc").contains("max_left"));
  const std::string text = read(out / "report.txt");
  EXPECT_NE(text.find("max |wheel left|"), std::string::npos);
  EXPECT_NE(text.find("decrease (%)"), std::string::npos);
}

TEST(Cli, CompareAtEquilibrium) {
  TempDir dir;
  // Follower starts on its desired pose.
  std::string text = read(scenario("case_a.cfg"));
  text.replace(text.find("x = 0.4"), 7, "x = 0.25");
  text.replace(text.find("y = -0.18"), 9, "y = -0.1");
  text.replace(text.find("horizon = 120"), 13, "horizon = 2");
  const fs::path p = dir / "rest.cfg";
  std::ofstream(p) << text;
  const Result r = cli({"compare", p.string(), "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read(dir / "o" / "report.json"));
  EXPECT_NEAR(j["followers"][0]["left_decrease"].get<double>(), 0.0, 1e-3);
  EXPECT_NEAR(j["followers"][0]["right_decrease"].get<double>(), 0.0, 1e-3);
}
