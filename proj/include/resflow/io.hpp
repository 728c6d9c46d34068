#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "resflow/flow.hpp"

namespace resflow {

/// Shortest round-trip decimal form, locale independent.
std::string format_number(double value);
/// Fixed 17 significant digits, locale independent.
std::string format_number17(double value);
double parse_number(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

/// Header "layer,u1,..,ul", one row per layer.
void write_control_csv(const ControlGrid& u, std::ostream& out);
ControlGrid read_control_csv(std::istream& in);
void write_control_csv(const ControlGrid& u, const std::filesystem::path& path);
ControlGrid read_control_csv(const std::filesystem::path& path);

}  // namespace resflow
