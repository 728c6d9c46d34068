#include "resflow/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "resflow/error.hpp"

namespace resflow {

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_number17(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvalidArgument("cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

void write_control_csv(const ControlGrid& u, std::ostream& out) {
  out << "layer";
  for (int i = 0; i < u.n_fields(); ++i) out << ",u" << (i + 1);
  out << '\n';
  for (int k = 0; k < u.n_layers(); ++k) {
    out << (k + 1);
    for (int i = 0; i < u.n_fields(); ++i) out << ',' << format_number17(u(i, k));
    out << '\n';
  }
}

ControlGrid read_control_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("control csv: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.front() != "layer") throw InvalidArgument("control csv: bad header");
  const auto n_fields = static_cast<Eigen::Index>(header.size() - 1);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (static_cast<Eigen::Index>(cells.size()) != n_fields + 1) {
      throw InvalidArgument("control csv: row " + std::to_string(rows.size() + 1) + " has wrong width");
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_number(cells[c]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("control csv: no layers");
  Matrix values(n_fields, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (Eigen::Index i = 0; i < n_fields; ++i) values(i, static_cast<Eigen::Index>(k)) = rows[k][static_cast<std::size_t>(i)];
  }
  return ControlGrid(std::move(values));
}

void write_control_csv(const ControlGrid& u, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_control_csv(u, out);
}

ControlGrid read_control_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_control_csv(in);
}

}  // namespace resflow
