#pragma once

#include <stdexcept>
#include <vector>

#include "trimarket/linalg.hpp"
#include "trimarket/types.hpp"

namespace trimarket {

/// Injection shifting factors (DC power-transfer distribution factors).
/// values(l, j) is the sensitivity of the flow on line l, oriented
/// from_bus -> to_bus, to a net injection at bus j withdrawn at the slack.
/// The slack column is identically zero.
struct IsfMatrix {
  Matrix values;
  int slack_bus = 1;
};

struct LossFactors {
  std::vector<double> values;
};

/// Builds the ISF matrix from line reactances via the reduced DC susceptance
/// system. Throws on a disconnected network or a singular reduced system.
inline IsfMatrix compute_isf(const std::vector<Line>& lines, int n_buses, int slack_bus) {
  if (n_buses < 1) throw std::runtime_error("compute_isf: empty network");
  if (slack_bus < 1 || slack_bus > n_buses)
    throw std::runtime_error("compute_isf: slack bus out of range");

  // Connectivity check first, for a clean error.
  {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_buses));
    for (const Line& ln : lines) {
      adj[static_cast<std::size_t>(ln.from_bus - 1)].push_back(ln.to_bus - 1);
      adj[static_cast<std::size_t>(ln.to_bus - 1)].push_back(ln.from_bus - 1);
    }
    std::vector<char> seen(static_cast<std::size_t>(n_buses), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[static_cast<std::size_t>(u)])
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    if (count != n_buses) throw std::runtime_error("compute_isf: network is disconnected");
  }

  const int nr = n_buses - 1;  // reduced system size
  IsfMatrix out;
  out.slack_bus = slack_bus;
  out.values = Matrix(lines.size(), static_cast<std::size_t>(n_buses), 0.0);
  if (nr == 0) return out;  // single bus: no lines possible after validation

  // Map bus -> reduced index (slack removed).
  std::vector<int> red(static_cast<std::size_t>(n_buses) + 1, -1);
  {
    int r = 0;
    for (int b = 1; b <= n_buses; ++b)
      if (b != slack_bus) red[static_cast<std::size_t>(b)] = r++;
  }

  Matrix bred(static_cast<std::size_t>(nr), static_cast<std::size_t>(nr), 0.0);
  for (const Line& ln : lines) {
    const double b = 1.0 / ln.reactance;
    const int u = red[static_cast<std::size_t>(ln.from_bus)];
    const int v = red[static_cast<std::size_t>(ln.to_bus)];
    if (u >= 0) bred(static_cast<std::size_t>(u), static_cast<std::size_t>(u)) += b;
    if (v >= 0) bred(static_cast<std::size_t>(v), static_cast<std::size_t>(v)) += b;
    if (u >= 0 && v >= 0) {
      bred(static_cast<std::size_t>(u), static_cast<std::size_t>(v)) -= b;
      bred(static_cast<std::size_t>(v), static_cast<std::size_t>(u)) -= b;
    }
  }

  DenseLu lu;
  try {
    lu.factorize(bred);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("compute_isf: singular reduced susceptance matrix");
  }

  // Row l of the ISF is w^T restricted to non-slack buses, where
  // B' w = (e_u - e_v) / x_l.  (B' is symmetric.)
  std::vector<double> rhs(static_cast<std::size_t>(nr));
  std::vector<double> w;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const Line& ln = lines[l];
    std::fill(rhs.begin(), rhs.end(), 0.0);
    const int u = red[static_cast<std::size_t>(ln.from_bus)];
    const int v = red[static_cast<std::size_t>(ln.to_bus)];
    const double b = 1.0 / ln.reactance;
    if (u >= 0) rhs[static_cast<std::size_t>(u)] += b;
    if (v >= 0) rhs[static_cast<std::size_t>(v)] -= b;
    lu.solve(rhs, w);
    for (int bus = 1; bus <= n_buses; ++bus) {
      const int r = red[static_cast<std::size_t>(bus)];
      out.values(l, static_cast<std::size_t>(bus - 1)) =
          (r >= 0) ? w[static_cast<std::size_t>(r)] : 0.0;
    }
  }
  return out;
}

/// Case-provided loss factors, or the all-zeros vector.
inline LossFactors loss_factors(const Case& c) {
  LossFactors lf;
  if (c.loss_factors.empty())
    lf.values.assign(static_cast<std::size_t>(c.n_buses()), 0.0);
  else
    lf.values = c.loss_factors;
  return lf;
}

/// The ISF in effect for a case: the file override when present, otherwise
/// computed from reactances.
inline IsfMatrix effective_isf(const Case& c) {
  if (c.isf_override) {
    IsfMatrix m;
    m.values = *c.isf_override;
    m.slack_bus = c.slack_bus;
    return m;
  }
  return compute_isf(c.lines, c.n_buses(), c.slack_bus);
}

}  // namespace trimarket
