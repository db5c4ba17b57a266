#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bopt/solvers.hpp"
#include "bopt/types.hpp"

namespace bopt {

inline constexpr const char* kTraceHeader =
    "iter,obj,acc,step_t,lambda_used,ls_evals,dk_norm,xdiff,wall_ns";

/// 17 significant digits: doubles round-trip exactly through this.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable line endings
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace) {
    out << r.iter << ',' << format_double(r.obj) << ',';
    if (r.acc) out << format_double(*r.acc);
    out << ',' << format_double(r.step_t) << ',' << format_double(r.lambda_used) << ','
        << r.ls_evals << ',' << format_double(r.dk_norm) << ',' << format_double(r.xdiff)
        << ',' << r.wall_ns << '\n';
  }
}

inline std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw std::runtime_error("not a trace file (bad header): " + path);
  std::vector<TraceRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() == 8) cells.push_back("");  // trailing empty cell
    if (cells.size() != 9) throw std::runtime_error("malformed trace row in " + path);
    TraceRecord r;
    r.iter = std::stoi(cells[0]);
    r.obj = std::stod(cells[1]);
    if (!cells[2].empty()) r.acc = std::stod(cells[2]);
    r.step_t = std::stod(cells[3]);
    r.lambda_used = std::stod(cells[4]);
    r.ls_evals = std::stoi(cells[5]);
    r.dk_norm = std::stod(cells[6]);
    r.xdiff = std::stod(cells[7]);
    r.wall_ns = cells[8].empty() ? 0 : std::stoull(cells[8]);
    rows.push_back(r);
  }
  return rows;
}

/// Flat binary matrix layout: magic "BOPT", u32 rows, u32 cols, then
/// rows*cols doubles in row-major order. Native endianness.
inline void write_matrix_bin(const std::string& path, const Matrix& A) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open matrix file for writing: " + path);
  out.write("BOPT", 4);
  const std::uint32_t m = static_cast<std::uint32_t>(A.rows());
  const std::uint32_t n = static_cast<std::uint32_t>(A.cols());
  out.write(reinterpret_cast<const char*>(&m), sizeof m);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) {
      const double v = A(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

inline Matrix read_matrix_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "BOPT", 4) != 0)
    throw std::runtime_error("bad magic in matrix file: " + path);
  std::uint32_t m = 0, n = 0;
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in) throw std::runtime_error("truncated matrix header: " + path);
  Matrix A(m, n);
  for (std::uint32_t i = 0; i < m; ++i)
    for (std::uint32_t j = 0; j < n; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      if (!in) throw std::runtime_error("truncated matrix data: " + path);
      A(i, j) = v;
    }
  return A;
}

enum class PlotMode { PerIteration, PerTime };

/// Turn every trace CSV under `in_dir` into plot-ready TSV series: one file
/// for the objective and, when the accuracy column is present, one for the
/// accuracy. Values are emitted raw; a log scale is the plotter's business.
/// In per-time mode the x column (seconds) is nudged where needed so it is
/// strictly increasing. Returns the paths written.
inline std::vector<std::string> emit_plot_data(const std::string& in_dir, PlotMode mode,
                                               std::string out_dir = "") {
  namespace fs = std::filesystem;
  if (out_dir.empty()) out_dir = in_dir;
  fs::create_directories(out_dir);
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      std::ifstream probe(entry.path());
      std::string first;
      if (std::getline(probe, first) && first == kTraceHeader) inputs.push_back(entry.path());
    }
  std::sort(inputs.begin(), inputs.end());

  std::vector<std::string> written;
  for (const fs::path& path : inputs) {
    const std::vector<TraceRecord> rows = read_trace_csv(path.string());
    if (rows.empty()) continue;
    std::vector<double> xs(rows.size());
    if (mode == PlotMode::PerIteration) {
      for (std::size_t i = 0; i < rows.size(); ++i) xs[i] = rows[i].iter;
    } else {
      std::uint64_t prev = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::uint64_t ns = rows[i].wall_ns;
        if (i > 0 && ns <= prev) ns = prev + 1;
        xs[i] = static_cast<double>(ns) * 1e-9;
        prev = ns;
      }
    }
    const std::string stem = path.stem().string();
    const std::string xlabel = mode == PlotMode::PerIteration ? "iter" : "seconds";
    const auto emit = [&](const std::string& suffix, const std::string& ylabel, auto getter) {
      const std::string out_path = (fs::path(out_dir) / (stem + "." + suffix + ".tsv")).string();
      std::ofstream out(out_path, std::ios::binary);
      out << "# " << xlabel << '\t' << ylabel << '\n';
      for (std::size_t i = 0; i < rows.size(); ++i)
        out << format_double(xs[i]) << '\t' << format_double(getter(rows[i])) << '\n';
      written.push_back(out_path);
    };
    emit("obj", "obj", [](const TraceRecord& r) { return r.obj; });
    if (rows.front().acc)
      emit("acc", "acc", [](const TraceRecord& r) { return r.acc.value_or(0.0); });
  }
  return written;
}

}  // namespace bopt
