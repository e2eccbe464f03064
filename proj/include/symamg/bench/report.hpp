#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symamg/core/sparse.hpp"

namespace symamg {

struct ReportRow {
  std::string problem;   // mirrored | repeated
  index_t n_axis = 0;    // cells per axis of the (block) cube
  index_t s = 0;         // reflection depth (mirrored rows)
  index_t n_b = 1;       // subdomain / ring block count
  index_t n_unknowns = 0;
  std::string precond;
  index_t rank = -1;  // low-rank correction rank; -1 where it does not apply
  std::string method;  // pcg | gmres
  bool converged = false;
  index_t iterations = 0;
  real_t final_relres = 0.0;
  real_t t_setup = 0.0;
  real_t t_solve = 0.0;
  real_t speedup = 0.0;            // group-baseline t_solve / this t_solve
  real_t coarsening_ratio = 0.0;   // 0 where it does not apply
  real_t coarse_nnzr = 0.0;
  std::string note;
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string fmt_real(real_t v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace detail

/// Column order keeps the classic comparison block contiguous: precond,
/// n_b, coarsening, coarse_nnzr, iters, t_solve, speedup. Run identity
/// comes first, diagnostics trail.
inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "problem", "n",       "s",       "unknowns",  "method", "precond",
      "n_b",     "coarsening", "coarse_nnzr", "iters", "t_solve", "speedup",
      "rank",    "converged", "relres", "t_setup",   "note"};
  return cols;
}

inline std::vector<std::string> report_cells(const ReportRow& r) {
  return {r.problem,
          std::to_string(r.n_axis),
          std::to_string(r.s),
          std::to_string(r.n_unknowns),
          r.method,
          r.precond,
          std::to_string(r.n_b),
          r.coarsening_ratio > 0.0 ? detail::fmt_real(r.coarsening_ratio, 3) : std::string{},
          r.coarse_nnzr > 0.0 ? detail::fmt_real(r.coarse_nnzr, 3) : std::string{},
          std::to_string(r.iterations),
          detail::fmt_real(r.t_solve),
          r.speedup > 0.0 ? detail::fmt_real(r.speedup, 3) : std::string{},
          r.rank >= 0 ? std::to_string(r.rank) : std::string{},
          r.converged ? "yes" : "NO",
          detail::fmt_real(r.final_relres, 3),
          detail::fmt_real(r.t_setup),
          r.note};
}

/// RFC 4180: comma separated, CRLF line ends, quotes doubled inside quoted
/// fields.
inline void emit_csv(const std::vector<ReportRow>& rows, std::ostream& os) {
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "," : "") << detail::csv_escape(cols[i]);
  os << "\r\n";
  for (const auto& r : rows) {
    const auto cells = report_cells(r);
    for (std::size_t i = 0; i < cells.size(); ++i)
      os << (i ? "," : "") << detail::csv_escape(cells[i]);
    os << "\r\n";
  }
}

inline void emit_table(const std::vector<ReportRow>& rows, std::ostream& os) {
  const auto& cols = report_columns();
  std::vector<std::size_t> width(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) width[i] = cols[i].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back(report_cells(r));
    for (std::size_t i = 0; i < cols.size(); ++i)
      width[i] = std::max(width[i], cells.back()[i].size());
  }
  auto line = [&](const std::vector<std::string>& c) {
    for (std::size_t i = 0; i < c.size(); ++i)
      os << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << c[i];
    os << "\n";
  };
  line(cols);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.push_back(std::string(w, '-'));
  line(rule);
  for (const auto& c : cells) line(c);
}

/// JSON array of row objects; metadata stays out of the payload so the
/// output is directly loadable as a table.
inline void emit_json(const std::vector<ReportRow>& rows, std::ostream& os) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"problem", r.problem},
                   {"n", r.n_axis},
                   {"s", r.s},
                   {"n_b", r.n_b},
                   {"unknowns", r.n_unknowns},
                   {"precond", r.precond},
                   {"rank", r.rank >= 0 ? nlohmann::json(r.rank) : nlohmann::json()},
                   {"method", r.method},
                   {"converged", r.converged},
                   {"iters", r.iterations},
                   {"relres", r.final_relres},
                   {"t_setup", r.t_setup},
                   {"t_solve", r.t_solve},
                   {"speedup", r.speedup},
                   {"coarsening", r.coarsening_ratio},
                   {"coarse_nnzr", r.coarse_nnzr},
                   {"note", r.note}});
  }
  os << arr.dump(2) << "\n";
}

}  // namespace symamg
