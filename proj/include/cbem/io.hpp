#pragma once

// Text file formats.
//
// Observation files: integers separated by whitespace and/or newlines; a line
// whose first non-blank character is '#' is a comment.
// Estimate files: one real number per line; blank and '#' lines ignored.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cbem/cb_model.hpp"

namespace cbem {

/// Malformed or out-of-range input file content.
class DataError : public std::runtime_error {
public:
  DataError(const std::string &what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

namespace detail {

inline bool is_comment_or_blank(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r'))
      ++i;
    const std::size_t start = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' ||
                                line[i] == '\r'))
      ++i;
    if (i > start)
      tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

inline std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open " + path.string(), 0);
  return in;
}

} // namespace detail

inline Dataset read_observations(std::istream &in, int n) {
  if (n < 1)
    throw DomainError("trial count n must be >= 1");
  std::vector<int> obs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line))
      continue;
    for (auto tok : detail::split_ws(line)) {
      int value = 0;
      const auto [ptr, ec] =
          std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw DataError("line " + std::to_string(line_no) +
                            ": cannot parse '" + std::string(tok) +
                            "' as an integer count",
                        line_no);
      if (value < 0 || value > n)
        throw DataError("line " + std::to_string(line_no) + ": observation " +
                            std::to_string(value) + " outside [0, " +
                            std::to_string(n) + "]",
                        line_no);
      obs.push_back(value);
    }
  }
  if (obs.empty())
    throw DataError("no observations found", line_no);
  return Dataset(n, std::move(obs));
}

inline Dataset read_observations(const std::filesystem::path &path, int n) {
  auto in = detail::open_input(path);
  return read_observations(in, n);
}

/// One observation per line, preceded by a '#' header describing the draw.
inline void write_observations(std::ostream &out, const Dataset &data,
                               const std::string &header = {}) {
  if (!header.empty())
    out << "# " << header << '\n';
  for (int y : data.observations())
    out << y << '\n';
}

inline std::vector<double> read_estimates(std::istream &in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line))
      continue;
    const auto tokens = detail::split_ws(line);
    double v = 0.0;
    const auto tok = tokens.front();
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tokens.size() != 1 || ec != std::errc{} ||
        ptr != tok.data() + tok.size())
      throw DataError("line " + std::to_string(line_no) +
                          ": expected a single real number",
                      line_no);
    values.push_back(v);
  }
  if (values.empty())
    throw DataError("no estimates found", line_no);
  return values;
}

inline std::vector<double> read_estimates(const std::filesystem::path &path) {
  auto in = detail::open_input(path);
  return read_estimates(in);
}

inline void write_estimates(std::ostream &out, const std::vector<double> &values) {
  for (double v : values) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
}

} // namespace cbem
