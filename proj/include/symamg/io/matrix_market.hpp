#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "symamg/core/sparse.hpp"

namespace symamg {

/// Writes coordinate-format Matrix Market, optionally as `symmetric` with the
/// lower triangle only (requires a symmetric input pattern).
inline void write_matrix_market(const SparseMatrix& A, const std::string& path,
                                bool symmetric_format = false) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real "
      << (symmetric_format ? "symmetric" : "general") << "\n";
  index_t count = 0;
  for (index_t i = 0; i < A.n_rows; ++i)
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
      if (!symmetric_format || A.col_indices[p] <= i) ++count;
  out << A.n_rows << " " << A.n_cols << " " << count << "\n";
  char buf[64];
  for (index_t i = 0; i < A.n_rows; ++i) {
    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
      if (symmetric_format && A.col_indices[p] > i) continue;
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, A.col_indices[p] + 1, A.values[p]);
      out << buf;
    }
  }
}

/// Reads coordinate-format Matrix Market (real, general or symmetric).
inline SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_market: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("read_matrix_market: missing header");
  std::istringstream hdr(line);
  std::string tag, object, format, field, symmetry;
  hdr >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate" || field != "real")
    throw std::runtime_error("read_matrix_market: unsupported header: " + line);
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw std::runtime_error("read_matrix_market: unsupported symmetry: " + symmetry);
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream dims(line);
  index_t rows = 0, cols = 0;
  long long entries = 0;
  if (!(dims >> rows >> cols >> entries))
    throw std::runtime_error("read_matrix_market: bad size line");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(entries) * (symmetric ? 2 : 1));
  for (long long e = 0; e < entries; ++e) {
    index_t i = 0, j = 0;
    real_t v = 0.0;
    if (!(in >> i >> j >> v)) throw std::runtime_error("read_matrix_market: truncated entries");
    t.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
  }
  return from_triplets(rows, cols, std::move(t));
}

/// Plain-text permutation: one index per line.
inline void write_ordering(const std::vector<index_t>& ordering, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_ordering: cannot open " + path);
  for (index_t v : ordering) out << v << "\n";
}

inline std::vector<index_t> read_ordering(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_ordering: cannot open " + path);
  std::vector<index_t> ord;
  index_t v;
  while (in >> v) ord.push_back(v);
  return ord;
}

}  // namespace symamg
