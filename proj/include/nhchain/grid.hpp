#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhchain/io.hpp"

namespace nhchain {

// One row of a prediction/difference grid. Invalid cells carry nan in the
// value columns and valid=0; they are never interpolated over.
struct GridCell {
  double eta = 0.0;
  double u_over_t = 0.0;
  double truth = std::nan("");
  double pred = std::nan("");
  double diff = std::nan("");
  bool valid = true;
};

struct PhaseGrid {
  std::vector<GridCell> cells;  // row-major: eta outer, u_over_t inner
};

inline constexpr const char* kGridCsvHeader = "eta,u_over_t,true,pred,diff,valid";

inline void write_grid_csv(const PhaseGrid& grid, const std::string& path) {
  std::ofstream out = open_output(path);
  out << kGridCsvHeader << '\n';
  for (const GridCell& c : grid.cells)
    out << format_double(c.eta) << ',' << format_double(c.u_over_t) << ','
        << format_double(c.truth) << ',' << format_double(c.pred) << ','
        << format_double(c.diff) << ',' << (c.valid ? 1 : 0) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline PhaseGrid read_grid_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kGridCsvHeader)
    throw std::runtime_error(path + ":1: unexpected header");
  PhaseGrid grid;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (f.size() != 6)
      throw std::runtime_error(ctx + ": expected 6 fields, got " +
                               std::to_string(f.size()));
    GridCell c;
    c.eta = parse_double(f[0], ctx);
    c.u_over_t = parse_double(f[1], ctx);
    c.truth = parse_double(f[2], ctx);
    c.pred = parse_double(f[3], ctx);
    c.diff = parse_double(f[4], ctx);
    long valid = parse_long(f[5], ctx);
    if (valid != 0 && valid != 1)
      throw std::runtime_error(ctx + ": valid flag must be 0 or 1");
    c.valid = valid == 1;
    grid.cells.push_back(c);
  }
  return grid;
}

// Rectangular decomposition of a grid's cells; fails when the rows do not
// form a complete eta x u lattice in row-major order.
struct GridAxes {
  std::vector<double> eta;
  std::vector<double> u_over_t;
};

inline GridAxes grid_axes(const PhaseGrid& grid) {
  if (grid.cells.empty()) throw std::runtime_error("grid: empty");
  GridAxes axes;
  axes.u_over_t.push_back(grid.cells[0].u_over_t);
  std::size_t row_len = grid.cells.size();
  for (std::size_t i = 1; i < grid.cells.size(); ++i) {
    if (grid.cells[i].eta != grid.cells[0].eta) {
      row_len = i;
      break;
    }
    axes.u_over_t.push_back(grid.cells[i].u_over_t);
  }
  if (grid.cells.size() % row_len != 0)
    throw std::runtime_error("grid: not rectangular");
  const std::size_t n_rows = grid.cells.size() / row_len;
  for (std::size_t r = 0; r < n_rows; ++r) {
    axes.eta.push_back(grid.cells[r * row_len].eta);
    for (std::size_t c = 0; c < row_len; ++c) {
      const GridCell& cell = grid.cells[r * row_len + c];
      if (cell.eta != axes.eta.back() || cell.u_over_t != axes.u_over_t[c])
        throw std::runtime_error("grid: not rectangular");
    }
  }
  return axes;
}

}  // namespace nhchain
