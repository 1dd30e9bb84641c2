#pragma once
// CSV serialization.  Doubles are written in the shortest form that reads
// back to the same bits.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sle/error.hpp"
#include "sle/loewner.hpp"

namespace sle {

using TableValue = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string name;  // file stem, e.g. "results"
  std::vector<std::string> columns;
  std::vector<std::vector<TableValue>> rows;

  void add_row(std::vector<TableValue> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add_row: column count mismatch in " + name);
    rows.push_back(std::move(row));
  }
};

inline std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string format_value(const TableValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  const auto& s = std::get<std::string>(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_value(row[j]);
    os << '\n';
  }
}

inline void write_csv(const std::string& path, const Table& t) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(f, t);
}

// Numeric CSV with a header row.
inline std::vector<std::vector<double>> read_numeric_csv(std::istream& is, std::vector<std::string>* header = nullptr) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("read_numeric_csv: missing header");
  if (header) {
    header->clear();
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) header->push_back(col);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      double x = 0;
      const auto r = std::from_chars(line.data() + pos, line.data() + end, x);
      if (r.ec != std::errc{} || r.ptr != line.data() + end) throw DomainError("read_numeric_csv: bad number in: " + line);
      row.push_back(x);
      pos = end + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Table trace_table(const Trace& tr) {
  Table t{"trace", {"t", "re", "im"}, {}};
  for (std::size_t i = 0; i < tr.points.size(); ++i)
    t.add_row({tr.times[i], tr.points[i].real(), tr.points[i].imag()});
  return t;
}

inline Trace read_trace_csv(std::istream& is) {
  Trace tr;
  for (const auto& r : read_numeric_csv(is)) {
    if (r.size() != 3) throw DomainError("read_trace_csv: expected t,re,im");
    tr.times.push_back(r[0]);
    tr.points.emplace_back(r[1], r[2]);
  }
  return tr;
}

inline Table driving_table(const DrivingPath& d) {
  Table t{"driving", {"t", "w"}, {}};
  for (std::size_t i = 0; i < d.force_images.size(); ++i) t.columns.push_back("v" + std::to_string(i + 1));
  for (std::size_t k = 0; k < d.w.size(); ++k) {
    std::vector<TableValue> row{d.time(k), d.w[k]};
    for (const auto& f : d.force_images) row.emplace_back(f[k]);
    t.add_row(std::move(row));
  }
  return t;
}

// The step is recovered from the first two time stamps.
inline DrivingPath read_driving_csv(std::istream& is) {
  std::vector<std::string> header;
  const auto rows = read_numeric_csv(is, &header);
  if (header.size() < 2 || header[0] != "t" || header[1] != "w") throw DomainError("read_driving_csv: expected t,w,...");
  DrivingPath d;
  d.force_images.assign(header.size() - 2, {});
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw DomainError("read_driving_csv: ragged row");
    d.w.push_back(r[1]);
    for (std::size_t i = 2; i < r.size(); ++i) d.force_images[i - 2].push_back(r[i]);
  }
  d.dt = rows.size() >= 2 ? rows[1][0] - rows[0][0] : 0.0;
  return d;
}

}  // namespace sle
