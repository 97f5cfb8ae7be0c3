#include "stabgi/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace stabgi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_entry(std::string_view field, std::size_t line, std::size_t column) {
  field = trim(field);
  if (field.empty()) throw ParseError("empty entry", line, column);
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec == std::errc::result_out_of_range) throw ParseError("entry out of range", line, column);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("not a number: \"" + std::string(field) + "\"", line, column);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite entry", line, column);
  return value;
}

}  // namespace

Matrix parse_matrix_csv(std::string_view text) {
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  if (text.empty()) throw ParseError("empty matrix", 1, 1);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (true) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    if (trim(line).empty()) throw ParseError("empty line", line_no, 1);

    std::vector<double> row;
    std::size_t start = 0;
    std::size_t column = 0;
    while (true) {
      ++column;
      const auto comma = line.find(',', start);
      row.push_back(parse_entry(line.substr(start, comma - start), line_no, column));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("row has " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(rows.front().size()),
                       line_no, std::min(row.size(), rows.front().size()) + 1);
    }
    rows.push_back(std::move(row));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }

  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return M;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix_csv(buf.str());
}

std::string format_matrix_csv(const Matrix& M) {
  std::string out;
  char buf[64];
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof buf, M(i, j));
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace stabgi
