// Command-line front end: generate cases, solve the joint bidding/pricing
// problem, run offset sweeps, validate stored results, export models.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trimarket/case_gen.hpp"
#include "trimarket/case_io.hpp"
#include "trimarket/harness.hpp"
#include "trimarket/joint_solve.hpp"
#include "trimarket/mps.hpp"

using namespace trimarket;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> grid;
  if (s.find(':') != std::string::npos) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream in(s);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
      throw std::runtime_error("bad grid spec, expected lo:hi:step");
    for (double v = lo; v <= hi + 1e-12; v += step) grid.push_back(v);
  } else {
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) grid.push_back(std::stod(tok));
  }
  return grid;
}

int exit_code_for(SolveStatus st) {
  switch (st) {
    case SolveStatus::kOptimal: return 0;
    case SolveStatus::kInfeasible: return 2;
    case SolveStatus::kUnbounded: return 2;
    case SolveStatus::kIterationLimit: return 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tri-layer electricity market toolkit"};
  app.require_subcommand(1);

  // ---- gen -----------------------------------------------------------
  std::string gen_spec_path, gen_out, gen_builtin;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen", "generate a seeded random case");
  gen->add_option("spec", gen_spec_path, "generation spec file (JSON)");
  gen->add_option("--builtin", gen_builtin, "built-in spec: smallsys | desk");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output case path")->required();

  // ---- solve ---------------------------------------------------------
  std::string solve_case, solve_variant = "full", solve_out;
  double solve_gap = 1e-6, solve_time = 0.0;
  int solve_workers = 1;
  auto* solve = app.add_subcommand("solve", "solve the joint bidding/pricing problem");
  solve->add_option("case", solve_case, "case file")->required();
  solve->add_option("--variant", solve_variant, "full|nonprofit|equal-price|no-reserve");
  solve->add_option("--gap", solve_gap, "relative optimality gap");
  solve->add_option("--workers", solve_workers, "worker threads");
  solve->add_option("--time-limit", solve_time, "seconds (0 = none)");
  solve->add_option("--out", solve_out, "output base path (.txt/.csv/.json)");

  // ---- sweep ---------------------------------------------------------
  std::string sweep_case, sweep_target = "alpha-offset", sweep_variant = "full";
  std::string sweep_grid = "-10:10:1", sweep_out, sweep_scope = "all";
  double sweep_gap = 1e-6, sweep_time = 0.0;
  std::uint64_t sweep_seed = 0;
  int sweep_workers = 1;
  auto* sweep = app.add_subcommand("sweep", "offset sweeps over prices or parameters");
  sweep->add_option("case", sweep_case, "case file")->required();
  sweep->add_option("--target", sweep_target,
                    "alpha-offset|euc-benefit-offset|rival-bid-offset");
  sweep->add_option("--grid", sweep_grid, "lo:hi:step or comma list");
  sweep->add_option("--variant", sweep_variant, "full|no-reserve");
  sweep->add_option("--seed", sweep_seed, "seed recorded with the sweep");
  sweep->add_option("--scope", sweep_scope, "all or an area number (benefit sweeps)");
  sweep->add_option("--gap", sweep_gap, "relative optimality gap");
  sweep->add_option("--workers", sweep_workers, "grid points solved in parallel");
  sweep->add_option("--time-limit", sweep_time, "seconds per solve (0 = none)");
  sweep->add_option("--out", sweep_out, "output CSV path")->required();

  // ---- validate ------------------------------------------------------
  std::string val_case, val_result;
  auto* validate = app.add_subcommand("validate", "re-check a stored solve result");
  validate->add_option("case", val_case, "case file")->required();
  validate->add_option("result", val_result, "result JSON from solve --out")->required();

  // ---- export --------------------------------------------------------
  std::string exp_case, exp_variant = "full", exp_out;
  auto* exp = app.add_subcommand("export", "write the single-level model as MPS");
  exp->add_option("case", exp_case, "case file")->required();
  exp->add_option("--variant", exp_variant, "full|nonprofit|equal-price|no-reserve");
  exp->add_option("--out", exp_out, "output base path (.mps/.map)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      GenSpec spec;
      if (!gen_builtin.empty()) {
        if (gen_builtin == "smallsys") spec = GenSpec::ieee9_smallsys();
        else if (gen_builtin == "desk") spec = GenSpec::ieee9_desk();
        else throw std::runtime_error("unknown builtin spec: " + gen_builtin);
      } else if (!gen_spec_path.empty()) {
        spec = load_genspec(read_file(gen_spec_path));
      } else {
        throw std::runtime_error("gen: provide a spec file or --builtin");
      }
      Case c = generate_case(spec, gen_seed);
      write_file(gen_out, serialize_case(c));
      std::cout << "wrote " << gen_out << " (" << c.n_buses() << " buses, "
                << c.total_blocks() << " blocks)\n";
      return 0;
    }

    if (*solve) {
      Case c = load_case(read_file(solve_case));
      SolveJointOptions opts;
      opts.milp.gap = solve_gap;
      opts.milp.workers = solve_workers;
      if (solve_time > 0.0) opts.milp.time_limit = solve_time;
      auto t0 = std::chrono::steady_clock::now();
      JointResult r = solve_joint(c, variant_from_string(solve_variant), opts);
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (r.status == SolveStatus::kInfeasible || r.status == SolveStatus::kUnbounded) {
        std::cerr << "solve: " << to_string(r.status) << "\n";
        return exit_code_for(r.status);
      }
      std::string text = report_text(c, r, secs);
      std::cout << text;
      if (!solve_out.empty()) {
        write_file(solve_out + ".txt", text);
        write_file(solve_out + ".csv", report_csv(c, r));
        write_file(solve_out + ".json", result_json(c, r));
      }
      return exit_code_for(r.status);
    }

    if (*sweep) {
      Case c = load_case(read_file(sweep_case));
      SweepSpec spec;
      spec.target = sweep_target_from_string(sweep_target);
      spec.grid = parse_grid(sweep_grid);
      spec.variant = variant_from_string(sweep_variant);
      spec.fixed_seed = sweep_seed;
      if (sweep_scope != "all") {
        spec.all_areas = false;
        spec.area = std::stoi(sweep_scope) - 1;
      }
      SolveJointOptions opts;
      opts.milp.gap = sweep_gap;
      if (sweep_time > 0.0) opts.milp.time_limit = sweep_time;
      std::string csv = run_sweep_csv(c, spec, opts, sweep_workers);
      write_file(sweep_out, csv);
      std::cout << "wrote " << sweep_out << " (" << spec.grid.size() << " rows)\n";
      return 0;
    }

    if (*validate) {
      Case c = load_case(read_file(val_case));
      JointResult r = result_from_json(read_file(val_result));
      ValidationOutcome v = validate_result(c, r);
      for (const auto& line : v.lines) std::cout << line << "\n";
      std::cout << (v.pass ? "validation passed" : "validation FAILED") << "\n";
      return v.pass ? 0 : 4;
    }

    if (*exp) {
      Case c = load_case(read_file(exp_case));
      MilpModel model = build_joint_milp(c, variant_from_string(exp_variant));
      MpsDocument doc = export_mps(model);
      write_file(exp_out + ".mps", doc.mps);
      write_file(exp_out + ".map", doc.name_map);
      std::cout << "wrote " << exp_out << ".mps (" << model.num_rows() << " rows, "
                << model.num_vars() << " columns, " << model.num_binaries()
                << " binaries) and " << exp_out << ".map\n";
      return 0;
    }
  } catch (const CaseFormatError& e) {
    std::cerr << "case error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
