#include "ehjb/io.hpp"

#include <cstdio>
#include <fstream>

namespace ehjb {

namespace {

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_field_csv(const DiscreteField& field, const std::string& path) {
  if (field.grid == nullptr) throw GridMismatch("field has no grid");
  const Grid& grid = *field.grid;
  if (field.values.size() != static_cast<std::size_t>(grid.size()))
    throw GridMismatch("field size does not match its grid");
  auto out = open_out(path);
  out << (grid.dim == 1 ? "x,value\n" : "x,y,value\n");
  for (int i = 0; i < grid.size(); ++i) {
    const Vec& x = grid.nodes[static_cast<std::size_t>(i)];
    for (int k = 0; k < grid.dim; ++k) out << full_precision(x[k]) << ',';
    out << full_precision(field.values[static_cast<std::size_t>(i)]) << '\n';
  }
}

void write_paths_csv(const TrajectoryBatch& batch, const std::string& path) {
  auto out = open_out(path);
  out << (batch.dim == 1 ? "path,t,x\n" : "path,t,x,y\n");
  const int n_cp = static_cast<int>(batch.checkpoint_times.size());
  if (n_cp == 0) {
    for (int p = 0; p < batch.n_paths; ++p) {
      out << p << ',' << full_precision(batch.exit_time[static_cast<std::size_t>(p)]);
      for (int k = 0; k < batch.dim; ++k)
        out << ','
            << full_precision(
                   batch.final_position[static_cast<std::size_t>(p) * batch.dim +
                                        static_cast<std::size_t>(k)]);
      out << '\n';
    }
    return;
  }
  for (int p = 0; p < batch.n_paths; ++p)
    for (int j = 0; j < n_cp; ++j) {
      out << p << ',' << full_precision(batch.checkpoint_times[static_cast<std::size_t>(j)]);
      const std::size_t base =
          (static_cast<std::size_t>(p) * n_cp + static_cast<std::size_t>(j)) *
          batch.dim;
      for (int k = 0; k < batch.dim; ++k)
        out << ',' << full_precision(batch.checkpoints[base + static_cast<std::size_t>(k)]);
      out << '\n';
    }
}

void write_json_file(const Json& j, const std::string& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

Json to_json(const Vec& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Json grid_metadata(const Grid& grid) {
  Json j;
  j["h"] = grid.h;
  j["dim"] = grid.dim;
  Json lo = Json::array(), hi = Json::array();
  lo.push_back(grid.x0);
  hi.push_back(grid.x0 + (grid.nx - 1) * grid.h);
  if (grid.dim == 2) {
    lo.push_back(grid.y0);
    hi.push_back(grid.y0 + (grid.ny - 1) * grid.h);
  }
  j["extent_lo"] = lo;
  j["extent_hi"] = hi;
  j["lattice_points"] = grid.lattice_size();
  j["interior_nodes"] = grid.size();
  j["exterior_points"] = grid.lattice_size() - grid.size();
  int adj = 0;
  for (uint8_t b : grid.boundary_adjacent) adj += b ? 1 : 0;
  j["boundary_adjacent_nodes"] = adj;
  return j;
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::irrelevant: return "irrelevant";
    case Condition::invariance: return "invariance";
    case Condition::relevant: return "relevant";
    case Condition::sell: return "sell";
    case Condition::compact_convexity: return "compact_convexity";
  }
  return "unknown";
}

Json to_json(const MarginReport& report) {
  Json j;
  j["passes"] = report.passes;
  j["min_margin"] = report.min_margin;
  j["worst_point"] = to_json(report.worst_point);
  j["samples"] = report.samples;
  return j;
}

Json to_json(const AssumptionReport& report) {
  Json j;
  j["condition"] = to_string(report.condition);
  j["holds"] = report.holds;
  j["delta"] = report.delta;
  j["k"] = report.k;
  j["gamma"] = report.gamma;
  j["worst_margin"] = report.worst_margin;
  j["worst_point"] = to_json(report.worst_point);
  j["detail"] = report.detail;
  return j;
}

Json to_json(const DiscountedSolution& sol) {
  Json j;
  j["lambda"] = sol.lambda;
  j["residual_sup"] = sol.residual_sup;
  j["iterations"] = sol.iterations;
  j["nodes"] = static_cast<int>(sol.field.values.size());
  double lo = 0.0, hi = 0.0;
  if (!sol.field.values.empty()) {
    lo = hi = sol.field.values.front();
    for (double v : sol.field.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  j["field_min"] = lo;
  j["field_max"] = hi;
  return j;
}

Json to_json(const ErgodicSolution& sol, const std::string& field_csv_path) {
  Json j;
  j["c"] = sol.c;
  Json trace = Json::array();
  for (const auto& row : sol.trace) {
    Json r;
    r["lambda"] = row.lambda;
    r["lambda_u_ref"] = row.lambda_u_ref;
    r["core_variation"] = row.core_variation;
    trace.push_back(r);
  }
  j["lambda_trace"] = trace;
  Json growth = Json::array();
  for (const auto& row : sol.growth_report) {
    Json r;
    r["delta"] = row.delta;
    r["ratio"] = row.ratio;
    growth.push_back(r);
  }
  j["growth_table"] = growth;
  j["field_csv_path"] = field_csv_path;
  j["ref_node"] = sol.ref_node;
  j["cell_residual"] = sol.cell_residual;
  j["extrapolation_order"] = sol.extrapolation_order;
  return j;
}

Json to_json(const ExitStatistics& st) {
  Json j;
  j["n_paths"] = st.n_paths;
  j["n_exits"] = st.n_exits;
  j["exit_fraction"] = st.exit_fraction;
  j["std_error"] = st.std_error;
  j["mean_exit_time_given_exit"] = st.mean_exit_time_given_exit;
  return j;
}

Json to_json(const RefinementRow& row) {
  Json j;
  j["dt"] = row.dt;
  j["exit_fraction"] = row.exit_fraction;
  j["std_error"] = row.std_error;
  return j;
}

Json to_json(const ViabilityReport& rep) {
  Json j;
  j["status"] = to_string(rep.status);
  j["gate"] = to_json(rep.gate);
  Json rows = Json::array();
  for (const auto& r : rep.rows) rows.push_back(to_json(r));
  j["rows"] = rows;
  j["threshold"] = rep.threshold;
  j["monotone_ok"] = rep.monotone_ok;
  return j;
}

Json to_json(const InvarianceReport& rep) {
  Json j;
  j["status"] = to_string(rep.status);
  j["gate"] = to_json(rep.gate);
  Json runs = Json::array();
  for (const auto& run : rep.runs) {
    Json r;
    r["policy"] = run.policy_name;
    Json rows = Json::array();
    for (const auto& row : run.rows) rows.push_back(to_json(row));
    r["rows"] = rows;
    runs.push_back(r);
  }
  j["runs"] = runs;
  j["worst_fraction"] = rep.worst_fraction;
  j["threshold"] = rep.threshold;
  j["monotone_ok"] = rep.monotone_ok;
  return j;
}

Json to_json(const MonteCarloValue& v) {
  Json j;
  j["estimate"] = v.estimate;
  j["std_error"] = v.std_error;
  j["n_paths"] = v.n_paths;
  j["horizon"] = v.horizon;
  return j;
}

Json to_json(const ExitValueReport& rep) {
  Json j;
  j["status"] = to_string(rep.status);
  j["value"] = rep.value;
  j["theorem_value"] = rep.theorem_value;
  j["non_exiting"] = to_json(rep.non_exiting);
  j["seeking"] = to_json(rep.seeking);
  j["non_exiting_exit_fraction"] = rep.non_exiting_exit_fraction;
  j["seeking_exit_fraction"] = rep.seeking_exit_fraction;
  j["solve_lambda"] = rep.solve_lambda;
  j["solve_h"] = rep.solve_h;
  j["gate_irrelevant"] = to_json(rep.gate_irrelevant);
  j["gate_relevant"] = to_json(rep.gate_relevant);
  return j;
}

Json to_json(const LiouvilleReport& rep) {
  Json j;
  j["status"] = to_string(rep.status);
  j["is_constant"] = rep.is_constant;
  j["max_deviation"] = rep.max_deviation;
  j["c"] = rep.c;
  j["gate"] = to_json(rep.gate);
  return j;
}

Json to_json(const UniquenessReport& rep) {
  Json j;
  j["passes"] = rep.passes;
  j["c_difference"] = rep.c_difference;
  j["chi_variation"] = rep.chi_variation;
  return j;
}

}  // namespace ehjb
