#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "mapfilt/error.hpp"
#include "mapfilt/series.hpp"

namespace mapfilt {

namespace csv {

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw Error(Errc::parse, "unterminated quote in CSV record: " + line);
  fields.push_back(std::move(cur));
  return fields;
}

bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool parse_number(const std::string& text, double& out) {
  std::string t = trim(text);
  t.erase(std::remove(t.begin(), t.end(), ','), t.end());
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace csv

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

MultiSeries read_series_csv(std::istream& in) {
  std::string line;
  if (!csv::next_line(in, line)) throw Error(Errc::parse, "series CSV is empty");
  auto header = csv::split_record(line);
  if (header.size() < 2 || csv::lower(csv::trim(header[0])) != "time")
    throw Error(Errc::parse, "series CSV header must be `time,<name1>,...`");
  std::vector<std::string> names;
  for (std::size_t i = 1; i < header.size(); ++i) names.push_back(csv::trim(header[i]));
  const Index n = static_cast<Index>(names.size());

  std::vector<std::string> times;
  std::vector<double> data;
  std::size_t row = 1;
  while (csv::next_line(in, line)) {
    ++row;
    auto fields = csv::split_record(line);
    if (static_cast<Index>(fields.size()) != n + 1)
      throw Error(Errc::parse, "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                   " fields, expected " + std::to_string(n + 1));
    times.push_back(csv::trim(fields[0]));
    for (Index j = 0; j < n; ++j) {
      double v = 0.0;
      if (!csv::parse_number(fields[static_cast<std::size_t>(j + 1)], v))
        throw Error(Errc::parse, "row " + std::to_string(row) + ": non-numeric value '" +
                                     fields[static_cast<std::size_t>(j + 1)] + "'");
      data.push_back(v);
    }
  }
  const Index T = static_cast<Index>(times.size());
  Mat values(T, n);
  for (Index t = 0; t < T; ++t)
    for (Index j = 0; j < n; ++j) values(t, j) = data[static_cast<std::size_t>(t * n + j)];
  MultiSeries x(std::move(values), std::move(names));
  // Integer indices carry no information; only keep real labels.
  bool integer_index = true;
  for (Index t = 0; t < T && integer_index; ++t) {
    const auto& s = times[static_cast<std::size_t>(t)];
    integer_index = !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  }
  if (!integer_index) x.time = std::move(times);
  x.validate();
  return x;
}

MultiSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open series file " + path);
  return read_series_csv(in);
}

void write_series_csv(std::ostream& out, const MultiSeries& x) {
  out << "time";
  for (const auto& name : x.names) out << ',' << csv::quote(name);
  out << '\n';
  for (Index t = 0; t < x.length(); ++t) {
    if (x.time.empty())
      out << t + 1;
    else
      out << csv::quote(x.time[static_cast<std::size_t>(t)]);
    for (Index j = 0; j < x.dims(); ++j) out << ',' << format_double(x.values(t, j));
    out << '\n';
  }
}

void write_series_csv(const std::string& path, const MultiSeries& x) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write series file " + path);
  write_series_csv(out, x);
}

}  // namespace mapfilt
