#include "tylercov/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace tylercov::csv {

std::string format(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_short(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format(m(i, j));
    }
    out << '\n';
  }
  if (!out.good()) throw Error("write failed on " + path);
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    long col = 0;
    while (pos <= line.size()) {
      ++col;
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const char* begin = line.data() + pos;
      const char* end = line.data() + comma;
      while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
      while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
      double value = 0.0;
      const auto res = std::from_chars(begin, end, value);
      if (res.ec != std::errc{} || res.ptr != end) {
        std::ostringstream os;
        os << path << ": row " << line_no << ", column " << col
           << ": cannot parse '" << std::string(begin, end) << "'";
        throw ParseError(os.str());
      }
      row.push_back(value);
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << path << ": row " << line_no << " has " << row.size()
         << " columns, expected " << rows.front().size();
      throw ParseError(os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
    }
  }
  return m;
}

}  // namespace tylercov::csv
