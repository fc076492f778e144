#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fastmc/dataset.hpp"
#include "fastmc/error.hpp"
#include "fastmc/sampling.hpp"
#include "fastmc/sde_sim.hpp"

namespace fastmc::csv {

/// Shortest representation that round-trips exactly.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline double require_number(std::string_view s, std::size_t line_no, std::string_view what) {
  const auto v = parse_number(s);
  if (!v) {
    throw InputError("line " + std::to_string(line_no) + ": cannot parse " + std::string(what) + " '" +
                     std::string(s) + "'");
  }
  return *v;
}

struct Line {
  std::size_t number;
  std::string text;
};

/// Non-empty lines; comment lines ('#') are returned separately.
inline std::vector<Line> read_lines(std::istream& in, std::vector<Line>* comments = nullptr) {
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    if (text.front() == '#') {
      if (comments) comments->push_back({number, text});
      continue;
    }
    lines.push_back({number, text});
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Path sets: "# origin: <tag>" comment, then header path_id,t,xi_1..xi_m.

inline void write_paths(std::ostream& out, const PathSet& set) {
  out << "# origin: " << origin_name(set.origin) << '\n';
  out << "path_id,t";
  for (std::size_t i = 0; i < set.dim; ++i) out << ",xi_" << (i + 1);
  out << '\n';
  for (std::size_t p = 0; p < set.count; ++p) {
    for (std::size_t k = 0; k < set.grid.points(); ++k) {
      out << p << ',' << format_number(set.grid.time(k));
      for (std::size_t i = 0; i < set.dim; ++i) out << ',' << format_number(set.value(p, k, i));
      out << '\n';
    }
  }
}

inline PathSet read_paths(std::istream& in) {
  std::vector<Line> comments;
  const auto lines = read_lines(in, &comments);
  if (lines.empty()) throw InputError("path csv: empty input");
  PathOrigin origin = PathOrigin::euler_maruyama;
  for (const auto& c : comments) {
    if (c.text.find("origin: spectral") != std::string::npos) origin = PathOrigin::spectral;
  }
  const auto header = split(lines[0].text);
  if (header.size() < 3 || header[0] != "path_id" || header[1] != "t") {
    throw InputError("line " + std::to_string(lines[0].number) + ": path csv header must start with path_id,t,xi_1");
  }
  const std::size_t m = header.size() - 2;

  std::vector<std::size_t> ids;
  std::vector<double> times;
  std::vector<double> values;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto fields = split(lines[l].text);
    if (fields.size() != m + 2) {
      throw InputError("line " + std::to_string(lines[l].number) + ": expected " + std::to_string(m + 2) +
                       " fields, got " + std::to_string(fields.size()));
    }
    const double id = require_number(fields[0], lines[l].number, "path_id");
    if (id < 0 || id != std::floor(id)) throw InputError("line " + std::to_string(lines[l].number) + ": bad path_id");
    ids.push_back(static_cast<std::size_t>(id));
    times.push_back(require_number(fields[1], lines[l].number, "time"));
    for (std::size_t i = 0; i < m; ++i) {
      const double v = require_number(fields[2 + i], lines[l].number, "value");
      if (!std::isfinite(v)) throw InputError("line " + std::to_string(lines[l].number) + ": non-finite value");
      values.push_back(v);
    }
  }
  if (ids.empty()) throw InputError("path csv: no data rows");
  std::size_t points = 0;
  while (points < ids.size() && ids[points] == ids[0]) ++points;
  if (points < 2) throw InputError("path csv: each path needs at least two time points");
  if (ids.size() % points != 0) throw InputError("path csv: paths have unequal lengths");
  const std::size_t count = ids.size() / points;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] != r / points) throw InputError("path csv: rows must be grouped by consecutive path_id from 0");
    if (times[r] != times[r % points]) throw InputError("path csv: paths do not share a time grid");
  }
  const double t0 = times.front();
  const double horizon = times[points - 1];
  TimeGrid grid(t0, horizon, (horizon - t0) / static_cast<double>(points - 1));
  for (std::size_t k = 0; k < points; ++k) {
    if (std::abs(times[k] - grid.time(k)) > 1e-9 * grid.step() + 4.0 * std::abs(times[k]) * 2.2e-16) {
      throw InputError("path csv: time column is not uniformly spaced");
    }
  }
  return PathSet{grid, m, count, origin, std::move(values)};
}

// ---------------------------------------------------------------------------
// Sample matrices: "# method: <tag>", then one row per variable.

inline void write_samples(std::ostream& out, const SampleMatrix& s) {
  out << "# method: " << method_name(s.method) << '\n';
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t k = 0; k < s.cols; ++k) {
      if (k) out << ',';
      out << format_number(s(i, k));
    }
    out << '\n';
  }
}

inline SampleMatrix read_samples(std::istream& in) {
  std::vector<Line> comments;
  const auto lines = read_lines(in, &comments);
  if (lines.empty()) throw InputError("sample csv: empty input");
  SampleMatrix s;
  for (const auto& c : comments) {
    if (c.text.find("method: lhs_decorrelated") != std::string::npos) s.method = SampleMethod::lhs_decorrelated;
    else if (c.text.find("method: lhs") != std::string::npos) s.method = SampleMethod::lhs;
    else if (c.text.find("method: srs") != std::string::npos) s.method = SampleMethod::srs;
  }
  s.rows = lines.size();
  for (const auto& line : lines) {
    const auto fields = split(line.text);
    if (s.cols == 0) s.cols = fields.size();
    if (fields.size() != s.cols) throw InputError("line " + std::to_string(line.number) + ": ragged sample row");
    for (auto f : fields) s.values.push_back(require_number(f, line.number, "sample"));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Datasets: columns t, xi_1..xi_m; an optional header row.

inline void write_dataset(std::ostream& out, const Dataset& data, double t0 = 0.0) {
  out << "t";
  for (std::size_t i = 0; i < data.dim; ++i) out << ",xi_" << (i + 1);
  out << '\n';
  for (std::size_t j = 0; j < data.size(); ++j) {
    out << format_number(t0 + static_cast<double>(j) * data.interval);
    for (double v : data.at(j)) out << ',' << format_number(v);
    out << '\n';
  }
}

inline Dataset read_dataset(std::istream& in) {
  auto lines = read_lines(in);
  if (lines.empty()) throw InputError("dataset csv: empty input");
  std::size_t first = 0;
  if (!parse_number(split(lines[0].text)[0])) first = 1;  // header row
  if (lines.size() - first < 2) throw InputError("dataset csv: at least two observations are required");
  const std::size_t columns = split(lines[first].text).size();
  if (columns < 2) throw InputError("line " + std::to_string(lines[first].number) + ": expected t and at least one value");
  const std::size_t m = columns - 1;
  std::vector<double> times;
  std::vector<double> values;
  for (std::size_t l = first; l < lines.size(); ++l) {
    const auto fields = split(lines[l].text);
    if (fields.size() != columns) {
      throw InputError("line " + std::to_string(lines[l].number) + ": expected " + std::to_string(columns) +
                       " fields, got " + std::to_string(fields.size()));
    }
    times.push_back(require_number(fields[0], lines[l].number, "time"));
    for (std::size_t i = 0; i < m; ++i) {
      const double v = require_number(fields[1 + i], lines[l].number, "value");
      if (!std::isfinite(v)) throw InputError("line " + std::to_string(lines[l].number) + ": non-finite value");
      values.push_back(v);
    }
  }
  const std::size_t n = times.size();
  const double h = (times.back() - times.front()) / static_cast<double>(n - 1);
  if (!(h > 0.0)) throw InputError("dataset csv: time column must be increasing");
  for (std::size_t j = 1; j < n; ++j) {
    if (std::abs((times[j] - times[j - 1]) - h) > 1e-9 * h) {
      throw InputError("line " + std::to_string(lines[first + j].number) + ": sampling interval is not uniform");
    }
  }
  return Dataset(m, h, std::move(values));
}

}  // namespace fastmc::csv
