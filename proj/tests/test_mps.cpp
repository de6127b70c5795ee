#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "trimarket/case_gen.hpp"
#include "trimarket/joint.hpp"
#include "trimarket/mps.hpp"

using namespace trimarket;

namespace {

// Minimal independent reader: section walking and entity counting only.
struct MpsCounts {
  int rows = 0;       // excluding the objective row
  int columns = 0;    // distinct column names
  int bv_entries = 0;
  int ranges = 0;
  bool saw_endata = false;
};

MpsCounts read_mps(const std::string& text) {
  MpsCounts counts;
  std::istringstream in(text);
  std::string line, section;
  std::map<std::string, bool> cols;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    if (line[0] != ' ') {
      std::istringstream hs(line);
      hs >> section;
      if (section == "ENDATA") counts.saw_endata = true;
      continue;
    }
    std::istringstream fs(line);
    std::vector<std::string> f;
    std::string tok;
    while (fs >> tok) f.push_back(tok);
    if (section == "ROWS" && f.size() >= 2 && f[0] != "N") ++counts.rows;
    if (section == "COLUMNS" && f.size() >= 3 && f[1] != "'MARKER'") cols[f[0]] = true;
    if (section == "RANGES" && f.size() >= 3) ++counts.ranges;
    if (section == "BOUNDS" && f.size() >= 3 && f[0] == "BV") ++counts.bv_entries;
  }
  counts.columns = static_cast<int>(cols.size());
  return counts;
}

}  // namespace

TEST_CASE("a model with one binary carries a BV entry") {
  MilpModel m;
  m.maximize = true;
  int z = m.add_binary("pick", PairGroup::kEuc);
  m.add_obj(z, 1.0);
  MpsDocument doc = export_mps(m);
  MpsCounts counts = read_mps(doc.mps);
  CHECK(counts.bv_entries == 1);
  CHECK(counts.saw_endata);
  CHECK(doc.mps.find("INTORG") != std::string::npos);
  CHECK(doc.mps.find("INTEND") != std::string::npos);
}

TEST_CASE("an independent reader recovers the row and column counts") {
  Case c = generate_case(GenSpec::ieee9_desk(), 3u);
  MilpModel model = build_joint_milp(c, Variant::kFull);
  MpsDocument doc = export_mps(model);
  MpsCounts counts = read_mps(doc.mps);
  CHECK(counts.rows == model.num_rows());
  CHECK(counts.columns == model.num_vars());
  CHECK(counts.bv_entries == model.num_binaries());
  // Ranged rows (the line-flow corridors) land in RANGES.
  int expect_ranges = 0;
  for (const auto& r : model.rows)
    if (r.lo != r.hi && r.lo != -kInf && r.hi != kInf) ++expect_ranges;
  CHECK(counts.ranges == expect_ranges);
}

TEST_CASE("export is byte-identical across repeated calls") {
  Case c = generate_case(GenSpec::ieee9_desk(), 4u);
  MilpModel model = build_joint_milp(c, Variant::kFull);
  MpsDocument a = export_mps(model);
  MpsDocument b = export_mps(model);
  CHECK(a.mps == b.mps);
  CHECK(a.name_map == b.name_map);
}

TEST_CASE("name map covers every row and column") {
  MilpModel m;
  m.maximize = false;
  int x = m.add_var("some_long_variable_name", 0.0, 1.0);
  m.add_obj(x, 1.0);
  m.add_row({{x}, {1.0}, 0.0, 1.0, "a_row_name"});
  MpsDocument doc = export_mps(m);
  CHECK(doc.name_map.find("some_long_variable_name") != std::string::npos);
  CHECK(doc.name_map.find("a_row_name") != std::string::npos);
}

TEST_CASE("fixed and free bounds render with their own tags") {
  MilpModel m;
  m.maximize = false;
  m.add_var("fixed", 2.5, 2.5);
  m.add_var("free", -kInf, kInf);
  m.add_var("upper_only", 0.0, 7.0);
  m.add_var("minus_inf", -kInf, 3.0);
  MpsDocument doc = export_mps(m);
  CHECK(doc.mps.find(" FX ") != std::string::npos);
  CHECK(doc.mps.find(" FR ") != std::string::npos);
  CHECK(doc.mps.find(" UP ") != std::string::npos);
  CHECK(doc.mps.find(" MI ") != std::string::npos);
}
