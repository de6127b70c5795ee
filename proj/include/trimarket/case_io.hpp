#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "trimarket/types.hpp"

namespace trimarket {

/// Raised for malformed case files: carries the JSON path of the offending
/// field whenever one is known.
class CaseFormatError : public std::runtime_error {
 public:
  explicit CaseFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace caseio_detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw CaseFormatError(path + ": unknown key \"" + it.key() + "\"");
  }
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw CaseFormatError(path + ": missing key \"" + key + "\"");
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw CaseFormatError(path + ": expected a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw CaseFormatError(path + ": expected an integer");
  return v.get<int>();
}

inline bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw CaseFormatError(path + ": expected a boolean");
  return v.get<bool>();
}

inline const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw CaseFormatError(path + ": expected an array");
  return v;
}

inline const json& as_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw CaseFormatError(path + ": expected an object");
  return v;
}

inline double get_num(const json& obj, const char* key, const std::string& path) {
  return as_number(require(obj, key, path), path + "." + key);
}

inline double get_num_or(const json& obj, const char* key, const std::string& path,
                         double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return as_number(*it, path + "." + key);
}

}  // namespace caseio_detail

/// Parses a case document. Throws CaseFormatError on malformed input or any
/// invariant violation (diagnostics from validate_case are fatal here).
inline Case load_case(const std::string& text) {
  using namespace caseio_detail;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CaseFormatError(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw CaseFormatError("top level: expected an object");
  reject_unknown_keys(doc, "top level",
                      {"network", "gens", "bids", "areas", "caps", "reserve_req", "bigm"});

  Case c;

  const json& net = as_object(require(doc, "network", "top level"), "network");
  reject_unknown_keys(net, "network",
                      {"buses", "slack_bus", "lines", "loss_factors", "isf"});
  const int n = as_int(require(net, "buses", "network"), "network.buses");
  if (n < 1) throw CaseFormatError("network.buses: must be >= 1");
  c.buses.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) c.buses[static_cast<std::size_t>(i)].id = i + 1;
  c.slack_bus = as_int(require(net, "slack_bus", "network"), "network.slack_bus");

  if (auto it = net.find("lines"); it != net.end()) {
    const json& lines = as_array(*it, "network.lines");
    int id = 1;
    for (const json& lj : lines) {
      const std::string path = "network.lines[" + std::to_string(id - 1) + "]";
      as_object(lj, path);
      reject_unknown_keys(lj, path, {"from", "to", "reactance", "flow_limit"});
      Line ln;
      ln.id = id++;
      ln.from_bus = as_int(require(lj, "from", path), path + ".from");
      ln.to_bus = as_int(require(lj, "to", path), path + ".to");
      ln.reactance = get_num(lj, "reactance", path);
      ln.flow_limit = get_num(lj, "flow_limit", path);
      c.lines.push_back(ln);
    }
  }

  if (auto it = net.find("loss_factors"); it != net.end()) {
    const json& lf = as_array(*it, "network.loss_factors");
    for (std::size_t i = 0; i < lf.size(); ++i)
      c.loss_factors.push_back(
          as_number(lf[i], "network.loss_factors[" + std::to_string(i) + "]"));
  }

  if (auto it = net.find("isf"); it != net.end()) {
    const json& mat = as_array(*it, "network.isf");
    Matrix m(mat.size(), static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < mat.size(); ++r) {
      const std::string path = "network.isf[" + std::to_string(r) + "]";
      const json& row = as_array(mat[r], path);
      if (row.size() != static_cast<std::size_t>(n))
        throw CaseFormatError(path + ": row length must equal bus count");
      for (std::size_t cidx = 0; cidx < row.size(); ++cidx)
        m(r, cidx) = as_number(row[cidx], path + "[" + std::to_string(cidx) + "]");
    }
    if (m.rows() != c.lines.size())
      throw CaseFormatError("network.isf: row count must equal line count");
    c.isf_override = std::move(m);
  }

  const json& gens = as_array(require(doc, "gens", "top level"), "gens");
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const std::string path = "gens[" + std::to_string(g) + "]";
    const json& gj = as_object(gens[g], path);
    reject_unknown_keys(gj, path,
                        {"bus", "energy_price", "reserve_price", "p_min", "p_max", "r_max"});
    GenOffer o;
    o.bus = as_int(require(gj, "bus", path), path + ".bus");
    o.energy_price = get_num(gj, "energy_price", path);
    o.reserve_price = get_num(gj, "reserve_price", path);
    o.p_min = get_num(gj, "p_min", path);
    o.p_max = get_num(gj, "p_max", path);
    o.r_max = get_num(gj, "r_max", path);
    c.gen_offers.push_back(o);
  }

  const json& bids = as_array(require(doc, "bids", "top level"), "bids");
  for (std::size_t j = 0; j < bids.size(); ++j) {
    const std::string path = "bids[" + std::to_string(j) + "]";
    const json& bj = as_object(bids[j], path);
    reject_unknown_keys(bj, path, {"bus", "energy_price", "reserve_price", "p_min", "p_max",
                                   "r_max", "strategic"});
    LseBid b;
    b.bus = as_int(require(bj, "bus", path), path + ".bus");
    b.energy_price = get_num_or(bj, "energy_price", path, 0.0);
    b.reserve_price = get_num_or(bj, "reserve_price", path, 0.0);
    b.p_min = get_num(bj, "p_min", path);
    b.p_max = get_num(bj, "p_max", path);
    b.r_max = get_num(bj, "r_max", path);
    b.strategic = as_bool(require(bj, "strategic", path), path + ".strategic");
    c.lse_bids.push_back(b);
  }

  const json& areas = as_array(require(doc, "areas", "top level"), "areas");
  for (std::size_t k = 0; k < areas.size(); ++k) {
    const std::string path = "areas[" + std::to_string(k) + "]";
    const json& aj = as_object(areas[k], path);
    reject_unknown_keys(aj, path, {"bus", "bid_ids", "blocks"});
    PricingArea a;
    a.bus = as_int(require(aj, "bus", path), path + ".bus");
    for (const json& idj : as_array(require(aj, "bid_ids", path), path + ".bid_ids"))
      a.bid_ids.push_back(as_int(idj, path + ".bid_ids[]"));
    const json& blocks = as_array(require(aj, "blocks", path), path + ".blocks");
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const std::string bpath = path + ".blocks[" + std::to_string(bi) + "]";
      const json& blj = as_object(blocks[bi], bpath);
      reject_unknown_keys(blj, bpath, {"benefit_price", "reserve_cost_price", "x_min", "x_max",
                                       "y_max", "euc"});
      EucBlock blk;
      blk.benefit_price = get_num(blj, "benefit_price", bpath);
      blk.reserve_cost_price = get_num(blj, "reserve_cost_price", bpath);
      blk.x_min = get_num(blj, "x_min", bpath);
      blk.x_max = get_num(blj, "x_max", bpath);
      blk.y_max = get_num(blj, "y_max", bpath);
      if (auto e = blj.find("euc"); e != blj.end())
        blk.euc = as_int(*e, bpath + ".euc");
      a.blocks.push_back(blk);
    }
    c.areas.push_back(std::move(a));
  }

  const json& caps = as_object(require(doc, "caps", "top level"), "caps");
  reject_unknown_keys(caps, "caps", {"alpha_min", "alpha_max", "beta_min", "beta_max"});
  c.caps.alpha_min = get_num(caps, "alpha_min", "caps");
  c.caps.alpha_max = get_num(caps, "alpha_max", "caps");
  c.caps.beta_min = get_num(caps, "beta_min", "caps");
  c.caps.beta_max = get_num(caps, "beta_max", "caps");

  c.reserve_req = as_number(require(doc, "reserve_req", "top level"), "reserve_req");

  if (auto it = doc.find("bigm"); it != doc.end()) {
    const json& bm = as_object(*it, "bigm");
    reject_unknown_keys(bm, "bigm",
                        {"dual_default", "price_var_bound", "lambda_bound", "flow", "reserve",
                         "gen_box", "gen_reserve", "bid_box", "bid_reserve", "euc"});
    c.bigm.dual_default = get_num_or(bm, "dual_default", "bigm", -1.0);
    c.bigm.price_var_bound = get_num_or(bm, "price_var_bound", "bigm", -1.0);
    c.bigm.lambda_bound = get_num_or(bm, "lambda_bound", "bigm", -1.0);
    for (const char* g :
         {"flow", "reserve", "gen_box", "gen_reserve", "bid_box", "bid_reserve", "euc"})
      if (auto git = bm.find(g); git != bm.end())
        c.bigm.dual_group[g] = as_number(*git, std::string("bigm.") + g);
  }

  auto diags = validate_case(c);
  if (!diags.empty()) throw CaseFormatError("schema violation: " + diags.front());
  return c;
}

/// Serializes a case back to the canonical document form. load_case on the
/// result reproduces the case field-for-field (doubles round-trip exactly).
inline std::string serialize_case(const Case& c) {
  using nlohmann::json;
  json doc;
  json net;
  net["buses"] = c.n_buses();
  net["slack_bus"] = c.slack_bus;
  json lines = json::array();
  for (const Line& ln : c.lines)
    lines.push_back({{"from", ln.from_bus},
                     {"to", ln.to_bus},
                     {"reactance", ln.reactance},
                     {"flow_limit", ln.flow_limit}});
  net["lines"] = std::move(lines);
  if (!c.loss_factors.empty()) net["loss_factors"] = c.loss_factors;
  if (c.isf_override) {
    json mat = json::array();
    for (std::size_t r = 0; r < c.isf_override->rows(); ++r) {
      json row = json::array();
      for (std::size_t j = 0; j < c.isf_override->cols(); ++j)
        row.push_back((*c.isf_override)(r, j));
      mat.push_back(std::move(row));
    }
    net["isf"] = std::move(mat);
  }
  doc["network"] = std::move(net);

  json gens = json::array();
  for (const GenOffer& o : c.gen_offers)
    gens.push_back({{"bus", o.bus},
                    {"energy_price", o.energy_price},
                    {"reserve_price", o.reserve_price},
                    {"p_min", o.p_min},
                    {"p_max", o.p_max},
                    {"r_max", o.r_max}});
  doc["gens"] = std::move(gens);

  json bids = json::array();
  for (const LseBid& b : c.lse_bids)
    bids.push_back({{"bus", b.bus},
                    {"energy_price", b.energy_price},
                    {"reserve_price", b.reserve_price},
                    {"p_min", b.p_min},
                    {"p_max", b.p_max},
                    {"r_max", b.r_max},
                    {"strategic", b.strategic}});
  doc["bids"] = std::move(bids);

  json areas = json::array();
  for (const PricingArea& a : c.areas) {
    json blocks = json::array();
    for (const EucBlock& blk : a.blocks)
      blocks.push_back({{"benefit_price", blk.benefit_price},
                        {"reserve_cost_price", blk.reserve_cost_price},
                        {"x_min", blk.x_min},
                        {"x_max", blk.x_max},
                        {"y_max", blk.y_max},
                        {"euc", blk.euc}});
    areas.push_back({{"bus", a.bus}, {"bid_ids", a.bid_ids}, {"blocks", std::move(blocks)}});
  }
  doc["areas"] = std::move(areas);

  doc["caps"] = {{"alpha_min", c.caps.alpha_min},
                 {"alpha_max", c.caps.alpha_max},
                 {"beta_min", c.caps.beta_min},
                 {"beta_max", c.caps.beta_max}};
  doc["reserve_req"] = c.reserve_req;

  json bm;
  if (c.bigm.dual_default > 0.0) bm["dual_default"] = c.bigm.dual_default;
  if (c.bigm.price_var_bound > 0.0) bm["price_var_bound"] = c.bigm.price_var_bound;
  if (c.bigm.lambda_bound > 0.0) bm["lambda_bound"] = c.bigm.lambda_bound;
  for (const auto& [k, v] : c.bigm.dual_group) bm[k] = v;
  if (!bm.empty()) doc["bigm"] = std::move(bm);

  return doc.dump(2) + "\n";
}

}  // namespace trimarket
