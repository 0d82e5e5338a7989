#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tvf/sim.hpp"

namespace tvf::csv {

/// Per-follower column stems, in output order.
const std::vector<std::string>& follower_columns();

std::vector<std::string> header(const std::vector<std::string>& follower_names);

/// 1 + 3 + 19 n.
std::size_t column_count(std::size_t followers);

/// Shortest decimal that reads back to the same double.
std::string format_number(double value);

void write_trace(std::ostream& out, const sim::Trace& trace);

/// Writes to a temporary file next to `path` and renames it into place.
void write_trace_file(const std::string& path, const sim::Trace& trace);

}  // namespace tvf::csv
