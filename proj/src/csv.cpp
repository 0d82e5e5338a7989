#include "tvf/csv.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace tvf::csv {

const std::vector<std::string>& follower_columns() {
  static const std::vector<std::string> cols = {
      "x",  "y",  "th", "ex_hat", "ey_hat", "eth_hat", "v",  "w",  "wL",      "wR",
      "k1", "k2", "k3", "w_d",    "th_d",   "V1",      "V2", "l_actual", "l_d"};
  return cols;
}

std::vector<std::string> header(const std::vector<std::string>& follower_names) {
  std::vector<std::string> out = {"t", "x_l", "y_l", "th_l"};
  for (const auto& name : follower_names) {
    for (const auto& col : follower_columns()) out.push_back(col + "_" + name);
  }
  return out;
}

std::size_t column_count(std::size_t followers) {
  return 1 + 3 + follower_columns().size() * followers;
}

namespace {

void put(std::string& line, double value) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (res.ec != std::errc()) throw std::runtime_error("number formatting failed");
  line.append(buf.data(), res.ptr);
}

}  // namespace

std::string format_number(double value) {
  std::string s;
  put(s, value);
  return s;
}

void write_trace(std::ostream& out, const sim::Trace& trace) {
  const auto cols = header(trace.names());
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i];
  }
  line += '\n';
  out << line;

  const std::size_t n = trace.follower_count();
  for (std::size_t k = 0; k < trace.rows(); ++k) {
    line.clear();
    const Pose& lp = trace.leader(k);
    put(line, trace.time(k));
    for (double v : {lp.x, lp.y, lp.theta}) {
      line += ',';
      put(line, v);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const sim::FollowerSample& s = trace.sample(k, i);
      const double row[] = {s.pose.x,         s.pose.y,         s.pose.theta,
                            s.e_hat.ex_hat,   s.e_hat.ey_hat,   s.e_hat.etheta_hat,
                            s.cmd.v,          s.cmd.omega,      s.wheels.left,
                            s.wheels.right,   s.gains.k1,       s.gains.k2,
                            s.gains.k3,       s.omega_d,        s.theta_d,
                            s.v1,             s.v2,             s.l_actual,
                            s.l_desired};
      for (double v : row) {
        line += ',';
        put(line, v);
      }
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("failed to write trace");
}

void write_trace_file(const std::string& path, const sim::Trace& trace) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    write_trace(f, trace);
    f.flush();
    if (!f) throw std::runtime_error("failed to write " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace tvf::csv
