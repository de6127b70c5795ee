#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "trimarket/milp_model.hpp"

namespace trimarket {

/// Fixed-format MPS rendering of a model plus the name-mangling map
/// (8-character row/column names are required by the fixed format).
struct MpsDocument {
  std::string mps;
  std::string name_map;
};

namespace mps_detail {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string field(const std::string& s, std::size_t width) {
  std::string out = s;
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

}  // namespace mps_detail

/// Writes the model in fixed-format MPS: ROWS / COLUMNS / RHS / RANGES /
/// BOUNDS, binaries marked both by INTORG/INTEND markers and BV bounds.
/// Maximization models are negated into minimization form (noted in the
/// header comment). Output is byte-stable for identical models.
inline MpsDocument export_mps(const MilpModel& model, const std::string& name = "TRIMKT") {
  using mps_detail::field;
  using mps_detail::fmt_num;
  const int n = model.num_vars();
  const int m = model.num_rows();
  const double sense = model.maximize ? -1.0 : 1.0;

  std::vector<char> is_binary(static_cast<std::size_t>(n), 0);
  for (const auto& b : model.binaries) is_binary[static_cast<std::size_t>(b.var)] = 1;

  auto rname = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "R%07d", i + 1);
    return std::string(buf);
  };
  auto cname = [&](int j) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%07d", is_binary[static_cast<std::size_t>(j)] ? 'Z' : 'C',
                  j + 1);
    return std::string(buf);
  };

  // Column-wise view of the rows.
  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n));
  for (int i = 0; i < m; ++i) {
    const auto& r = model.rows[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < r.idx.size(); ++k)
      cols[static_cast<std::size_t>(r.idx[k])].push_back({i, r.val[k]});
  }

  std::string out;
  out += "* " + name + (model.maximize ? ": objective negated to minimization form\n"
                                       : ": minimization form\n");
  out += "NAME          " + name + "\n";
  out += "ROWS\n";
  out += " N  COST\n";
  for (int i = 0; i < m; ++i) {
    const auto& r = model.rows[static_cast<std::size_t>(i)];
    char type;
    if (r.lo == r.hi) type = 'E';
    else if (r.lo != -kInf && r.hi == kInf) type = 'G';
    else type = 'L';  // upper-bounded or ranged (range emitted below)
    out += std::string(" ") + type + "  " + rname(i) + "\n";
  }

  out += "COLUMNS\n";
  auto emit_entry = [&](const std::string& col, const std::string& row, double v) {
    out += "    " + field(col, 10) + field(row, 10) + fmt_num(v) + "\n";
  };
  bool in_int = false;
  for (int pass = 0; pass < 2; ++pass) {
    // continuous columns first, then the integer block
    for (int j = 0; j < n; ++j) {
      bool integral = is_binary[static_cast<std::size_t>(j)] != 0;
      if ((pass == 0) == integral) continue;
      if (integral && !in_int) {
        out += "    MARKER                 'MARKER'                 'INTORG'\n";
        in_int = true;
      }
      bool any = false;
      double oc = model.objective[static_cast<std::size_t>(j)];
      if (oc != 0.0) {
        emit_entry(cname(j), "COST", sense * oc);
        any = true;
      }
      for (const auto& [row, v] : cols[static_cast<std::size_t>(j)]) {
        emit_entry(cname(j), rname(row), v);
        any = true;
      }
      if (!any) emit_entry(cname(j), "COST", 0.0);
    }
  }
  if (in_int) out += "    MARKER                 'MARKER'                 'INTEND'\n";

  out += "RHS\n";
  for (int i = 0; i < m; ++i) {
    const auto& r = model.rows[static_cast<std::size_t>(i)];
    double rhs;
    if (r.lo == r.hi) rhs = r.lo;
    else if (r.lo != -kInf && r.hi == kInf) rhs = r.lo;
    else rhs = r.hi;
    if (rhs != 0.0) out += "    " + field("RHS", 10) + field(rname(i), 10) + fmt_num(rhs) + "\n";
  }
  if (model.objective_offset != 0.0)
    out += "    " + field("RHS", 10) + field("COST", 10) +
           fmt_num(-sense * model.objective_offset) + "\n";

  bool any_range = false;
  for (const auto& r : model.rows)
    if (r.lo != r.hi && r.lo != -kInf && r.hi != kInf) any_range = true;
  if (any_range) {
    out += "RANGES\n";
    for (int i = 0; i < m; ++i) {
      const auto& r = model.rows[static_cast<std::size_t>(i)];
      if (r.lo != r.hi && r.lo != -kInf && r.hi != kInf)
        out += "    " + field("RNG", 10) + field(rname(i), 10) + fmt_num(r.hi - r.lo) + "\n";
    }
  }

  out += "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    if (is_binary[static_cast<std::size_t>(j)]) {
      out += " BV " + field("BND", 10) + cname(j) + "\n";
      continue;
    }
    double lo = model.var_lo[static_cast<std::size_t>(j)];
    double hi = model.var_hi[static_cast<std::size_t>(j)];
    if (lo == hi) {
      out += " FX " + field("BND", 10) + field(cname(j), 10) + fmt_num(lo) + "\n";
      continue;
    }
    if (lo == -kInf && hi == kInf) {
      out += " FR " + field("BND", 10) + cname(j) + "\n";
      continue;
    }
    if (lo == -kInf)
      out += " MI " + field("BND", 10) + cname(j) + "\n";
    else if (lo != 0.0)
      out += " LO " + field("BND", 10) + field(cname(j), 10) + fmt_num(lo) + "\n";
    if (hi != kInf)
      out += " UP " + field("BND", 10) + field(cname(j), 10) + fmt_num(hi) + "\n";
  }
  out += "ENDATA\n";

  MpsDocument doc;
  doc.mps = std::move(out);
  std::string map;
  map += "COST objective\n";
  for (int i = 0; i < m; ++i) {
    const auto& nm = model.rows[static_cast<std::size_t>(i)].name;
    map += rname(i) + " " + (nm.empty() ? "row" + std::to_string(i) : nm) + "\n";
  }
  for (int j = 0; j < n; ++j)
    map += cname(j) + " " + model.var_names[static_cast<std::size_t>(j)] + "\n";
  doc.name_map = std::move(map);
  return doc;
}

}  // namespace trimarket
