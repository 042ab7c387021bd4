#include "dll/data_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dll/error.hpp"

namespace dll {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& cell, std::size_t row,
                    const std::string& column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("csv row " + std::to_string(row) + ", column '" + column +
                     "': cannot parse '" + cell + "' as a number");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset load_csv(const std::string& path, TaskKind task) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("csv '" + path + "': missing header row");
  }
  const std::vector<std::string> header = split_line(line);
  if (header.size() < 3) {
    throw ParseError("csv '" + path +
                     "': header needs at least x0,y1,y2 columns");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    const std::string expected = "x" + std::to_string(j);
    if (header[j] != expected) {
      throw ParseError("csv '" + path + "': header column " +
                       std::to_string(j) + " is '" + header[j] +
                       "', expected '" + expected + "'");
    }
  }
  if (header[d] != "y1" || header[d + 1] != "y2") {
    throw ParseError("csv '" + path + "': header must end with y1,y2");
  }

  Dataset out;
  out.task = task;
  out.feature_dim = d;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("csv '" + path + "' row " + std::to_string(row) +
                       ": expected " + std::to_string(header.size()) +
                       " cells, got " + std::to_string(cells.size()));
    }
    Sample s;
    s.x.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      s.x.push_back(parse_double(cells[j], row, header[j]));
    }
    if (!cells[d].empty()) s.y1 = parse_double(cells[d], row, "y1");
    if (!cells[d + 1].empty()) s.y2 = parse_double(cells[d + 1], row, "y2");
    out.samples.push_back(std::move(s));
  }
  validate_dataset(out);
  return out;
}

void save_csv(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);  // binary: keep LF endings
  if (!out) throw Error("csv: cannot write '" + path + "'");
  for (std::size_t j = 0; j < dataset.feature_dim; ++j) {
    out << "x" << j << ",";
  }
  out << "y1,y2\n";
  for (const Sample& s : dataset.samples) {
    for (double v : s.x) out << format_double(v) << ",";
    if (s.y1) out << format_double(*s.y1);
    out << ",";
    if (s.y2) out << format_double(*s.y2);
    out << "\n";
  }
}

}  // namespace dll
