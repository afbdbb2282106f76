#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "mapfilt/error.hpp"
#include "mapfilt/pipeline.hpp"

namespace mapfilt {

namespace {

// Quarters are counted as 4 * year + (quarter - 1).
std::optional<int> parse_quarter(const std::string& text) {
  static const std::regex re(R"(^\s*(\d{4})\s*[-_ ]?\s*[Qq]([1-4])\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) return std::nullopt;
  return 4 * std::stoi(m[1].str()) + std::stoi(m[2].str()) - 1;
}

std::string quarter_label(int key) { return fmt::format("{}-Q{}", key / 4, key % 4 + 1); }

std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::initializer_list<const char*> names) {
  for (const char* want : names)
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == want) return i;
  return std::nullopt;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

MultiSeries qwi_ingest(std::istream& in, const QwiOptions& opts) {
  if (opts.counties.empty()) throw Error(Errc::invalid_argument, "qwi: at least one county is required");
  if (opts.measure.empty()) throw Error(Errc::invalid_argument, "qwi: a measure column name is required");

  std::string line;
  if (!csv::next_line(in, line)) throw Error(Errc::parse, "qwi: export is empty");
  const auto raw_header = csv::split_record(line);
  std::vector<std::string> header;
  for (const auto& h : raw_header) header.push_back(csv::lower(csv::trim(h)));

  const auto geo = find_column(header, {"geography_label", "geography", "county", "geo_name"});
  if (!geo) throw Error(Errc::parse, "qwi: no geography column (expected geography_label, geography, county or geo_name)");
  const auto year = find_column(header, {"year"});
  const auto quarter = find_column(header, {"quarter"});
  const auto period = find_column(header, {"period", "time"});
  if (!(year && quarter) && !period)
    throw Error(Errc::parse, "qwi: need `year` and `quarter` columns or a `period` column");
  const auto measure = find_column(header, {csv::lower(csv::trim(opts.measure)).c_str()});
  if (!measure)
    throw Error(Errc::parse, fmt::format("qwi: unknown measure '{}'; available columns: {}", opts.measure, join(raw_header)));

  // county (lower-cased) -> quarter -> value
  std::map<std::string, std::map<int, double>> data;
  std::map<std::string, std::string> display;
  std::size_t row = 1;
  while (csv::next_line(in, line)) {
    ++row;
    const auto fields = csv::split_record(line);
    if (fields.size() != header.size())
      throw Error(Errc::parse, fmt::format("qwi: row {} has {} fields, expected {}", row, fields.size(), header.size()));
    const std::string county = csv::trim(fields[*geo]);
    std::optional<int> key;
    if (year && quarter)
      key = parse_quarter(csv::trim(fields[*year]) + "-Q" + csv::trim(fields[*quarter]));
    else
      key = parse_quarter(fields[*period]);
    if (!key) throw Error(Errc::parse, fmt::format("qwi: row {} has an unreadable period", row));
    const std::string id = csv::lower(county);
    display.emplace(id, county);
    const std::string& cell = fields[*measure];
    if (csv::trim(cell).empty()) continue;  // suppressed cell; reported as a gap if selected
    double v = 0.0;
    if (!csv::parse_number(cell, v))
      throw Error(Errc::parse, fmt::format("qwi: row {} has non-numeric measure '{}'", row, cell));
    if (!data[id].emplace(*key, v).second)
      throw Error(Errc::parse, fmt::format("qwi: duplicate row for {} in {}", county, quarter_label(*key)));
  }

  std::vector<std::string> ids;
  for (const auto& c : opts.counties) {
    const std::string id = csv::lower(csv::trim(c));
    if (!display.count(id)) {
      std::vector<std::string> avail;
      for (const auto& [k, v] : display) avail.push_back(v);
      throw Error(Errc::parse, fmt::format("qwi: unknown county '{}'; available: {}", c, join(avail)));
    }
    ids.push_back(id);
  }

  int first = 0;
  int last = 0;
  if (!opts.start.empty()) {
    const auto k = parse_quarter(opts.start);
    if (!k) throw Error(Errc::invalid_argument, "qwi: bad start quarter " + opts.start);
    first = *k;
  } else {
    first = std::numeric_limits<int>::max();
    for (const auto& id : ids)
      if (!data[id].empty()) first = std::min(first, data[id].begin()->first);
  }
  if (!opts.end.empty()) {
    const auto k = parse_quarter(opts.end);
    if (!k) throw Error(Errc::invalid_argument, "qwi: bad end quarter " + opts.end);
    last = *k;
  } else {
    last = std::numeric_limits<int>::min();
    for (const auto& id : ids)
      if (!data[id].empty()) last = std::max(last, data[id].rbegin()->first);
  }
  if (first > last) throw Error(Errc::parse, "qwi: no observations in the requested range");

  std::vector<std::string> gaps;
  for (const auto& id : ids)
    for (int k = first; k <= last; ++k)
      if (!data[id].count(k)) gaps.push_back(display[id] + " " + quarter_label(k));
  if (!gaps.empty()) {
    const std::size_t shown = std::min<std::size_t>(gaps.size(), 20);
    std::vector<std::string> head(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(shown));
    throw Error(Errc::parse, fmt::format("qwi: {} missing quarter(s): {}{}", gaps.size(), join(head),
                                         gaps.size() > shown ? ", ..." : ""));
  }

  const Index T = last - first + 1;
  Mat values(T, static_cast<Index>(ids.size()));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < ids.size(); ++c) {
    names.push_back(display[ids[c]]);
    for (int k = first; k <= last; ++k) values(k - first, static_cast<Index>(c)) = data[ids[c]].at(k);
  }
  MultiSeries x(std::move(values), std::move(names));
  for (int k = first; k <= last; ++k) x.time.push_back(quarter_label(k));
  x.period = 4;
  x.validate();
  return x;
}

MultiSeries qwi_ingest(const std::string& path, const QwiOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open QWI export " + path);
  return qwi_ingest(in, opts);
}

}  // namespace mapfilt
