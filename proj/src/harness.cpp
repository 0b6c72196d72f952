#include "tvmpc/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tvmpc {

namespace {

ControllerConfig controller_config(const ScenarioConfig& cfg) {
  ControllerConfig cc;
  cc.timing = {cfg.t_ss, cfg.t_ds};
  cc.vertical = {cfg.z_c0, cfg.a_ss, cfg.a_ds, cfg.delta_z_c};
  cc.policy.compliance_margin = cfg.compliance_margin;
  cc.policy.reach_min = {-cfg.reach_x, cfg.reach_y_inner};
  cc.policy.reach_max = {cfg.reach_x, cfg.reach_y_outer};
  cc.dims = {cfg.np, cfg.nc};
  cc.sample_time = cfg.sample_time;
  cc.gravity = cfg.gravity;
  cc.rho = cfg.rho;
  cc.jerk_min = -cfg.jerk_limit;
  cc.jerk_max = cfg.jerk_limit;
  cc.rate_min = -cfg.rate_limit;
  cc.rate_max = cfg.rate_limit;
  cc.slack_weight = cfg.slack_weight;
  cc.slack_hard_window = cfg.slack_hard_window;
  cc.terminal_dcm_weight = cfg.terminal_weight;
  cc.qp_max_iter = cfg.qp_max_iter;
  cc.walk_steps = cfg.steps;
  return cc;
}

bool row_is_finite(const TraceRow& r) {
  for (int a = 0; a < 2; ++a) {
    if (!std::isfinite(r.com_pos[a]) || !std::isfinite(r.com_vel[a]) ||
        !std::isfinite(r.com_acc[a]) || !std::isfinite(r.jerk[a]) ||
        !std::isfinite(r.zmp_true[a])) {
      return false;
    }
  }
  return true;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  ScenarioResult result;
  Metrics& met = result.metrics;

  GaitSchedule sched =
      make_diagonal_schedule(cfg.step_length, cfg.step_width, cfg.foot_length,
                             cfg.steps, cfg.stair_rise);
  Controller ctrl(sched, controller_config(cfg));

  // COM centered between the initial stance pair, at rest.
  const Eigen::Vector2d com0 =
      (sched.footsteps[0].position + sched.footsteps[1].position) / 2.0;
  Plant plant({com0.x(), 0.0, 0.0}, {com0.y(), 0.0, 0.0}, cfg.mass);

  KfStated kf[2];
  for (int a = 0; a < 2; ++a) {
    kf[a] = KfStated::with_defaults({com0[a], 0.0, 0.0});
    kf[a].Q = Eigen::Vector3d(cfg.kf_q_pos, cfg.kf_q_vel, cfg.kf_q_acc)
                  .asDiagonal();
    kf[a].R = cfg.kf_r;
  }

  NoiseStream noise({cfg.noise_bound, cfg.noise_sigma, cfg.seed});
  const double T = cfg.sample_time;
  const int total_cycles = static_cast<int>(
      std::llround((cfg.steps + 1) * (cfg.t_ss + cfg.t_ds) / T));
  result.trace.rows.reserve(static_cast<size_t>(total_cycles));
  result.trace.aux.reserve(static_cast<size_t>(total_cycles));

  for (int k = 0; k < total_cycles; ++k) {
    const RefSample ref = ctrl.reference_now();

    // The plant follows the commanded vertical motion, possibly at a height
    // offset the planner does not know about.
    const double z_local_true =
        (ref.vertical.z - ref.support_z) + cfg.plant_height_offset;
    const double omega_true = natural_frequency<double>(
        {z_local_true, ref.vertical.acc, cfg.gravity});

    const AxisStated truth[2] = {plant.state(0, cfg.pushes),
                                 plant.state(1, cfg.pushes)};
    const Eigen::Vector2d zmp_meas =
        measure(plant, cfg.pushes, ref.omega, noise);
    for (int a = 0; a < 2; ++a) {
      kf[a] = kf_update(kf[a], zmp_meas[a], ref.omega);
    }

    const ControlOutput out = ctrl.control_step(kf[0].x_hat, kf[1].x_hat);

    TraceRow row;
    row.time = k * T;
    RowAux aux;
    const Eigen::Vector2d dcm_true{dcm_of_state(truth[0], omega_true),
                                   dcm_of_state(truth[1], omega_true)};
    for (int a = 0; a < 2; ++a) {
      row.zmp_ref[a] = ref.zmp_ref[a];
      row.zmp_true[a] = zmp_of_state(truth[a], omega_true);
      row.zmp_meas[a] = zmp_meas[a];
      row.com_pos[a] = truth[a].pos;
      row.com_vel[a] = truth[a].vel;
      row.com_acc[a] = truth[a].acc;
      row.dcm[a] = dcm_true[a];
      row.jerk[a] = out.jerk[a];
      row.adj_land[a] = out.adjusted_landing[a];
      aux.lo[a] = ref.lo[a];
      aux.hi[a] = ref.hi[a];
    }
    row.z_ref = ref.vertical.z;
    const bool not_optimal = out.qp_status[0] != QpStatus::optimal ||
                             out.qp_status[1] != QpStatus::optimal;
    const bool slacked = out.slack_used[0] || out.slack_used[1];
    row.qp_status = not_optimal ? 2 : (slacked ? 1 : 0);
    row.step_index = ref.step;

    aux.support_center = ref.support_center;
    aux.other_center = ref.other_center;
    aux.two_feet = ref.two_feet;
    double dist = (dcm_true - ref.support_center).norm();
    if (ref.two_feet) {
      dist = std::min(dist, (dcm_true - ref.other_center).norm());
    }
    aux.dcm_support_dist = dist;
    aux.nominal_landing = (ref.step >= 1 && ref.step <= cfg.steps)
                              ? ctrl.nominal_landing(ref.step)
                              : out.adjusted_landing;

    met.max_dcm_dist = std::max(met.max_dcm_dist, dist);
    bool violated = false;
    for (int a = 0; a < 2; ++a) {
      met.max_ref_dev[a] = std::max(
          met.max_ref_dev[a], std::abs(row.zmp_true[a] - row.zmp_ref[a]));
      if (row.zmp_true[a] > aux.hi[a] + 1e-8 ||
          row.zmp_true[a] < aux.lo[a] - 1e-8) {
        violated = true;
      }
    }
    if (violated) ++met.hard_violations;
    if (slacked) ++met.slack_activations;

    result.trace.rows.push_back(row);
    result.trace.aux.push_back(aux);

    if (!row_is_finite(row)) {
      met.completed = false;
      met.diagnostic = "non-finite state at row " + std::to_string(k);
      return result;
    }

    plant.step(out.jerk, cfg.pushes, T);
    const DiscreteModeld kf_model = discretize(T, ref.omega);
    for (int a = 0; a < 2; ++a) {
      kf[a] = kf_predict(kf[a], out.jerk[a], kf_model);
    }
    ctrl.advance();
  }

  met.completed = true;
  return result;
}

std::vector<ScenarioConfig> builtin_scenarios() {
  std::vector<ScenarioConfig> out;

  ScenarioConfig diag;
  diag.name = "diag_walk";
  out.push_back(diag);

  ScenarioConfig stair = diag;
  stair.name = "stair_climb";
  stair.stair_rise = 0.1;
  stair.delta_z_c = 0.1;
  out.push_back(stair);

  ScenarioConfig noise = diag;
  noise.name = "noise_walk";
  noise.noise_bound = 0.02;
  noise.noise_sigma = 0.01;
  out.push_back(noise);

  ScenarioConfig noise_stair = stair;
  noise_stair.name = "noise_stair";
  noise_stair.noise_bound = 0.02;
  noise_stair.noise_sigma = 0.01;
  out.push_back(noise_stair);

  for (const double off : {0.1, -0.1, 0.2, -0.2}) {
    ScenarioConfig h = diag;
    const int cm = static_cast<int>(std::lround(std::abs(off) * 10));
    h.name = std::string("height_") + (off > 0 ? "p" : "m") + "0" +
             std::to_string(cm);
    h.plant_height_offset = off;
    out.push_back(h);
  }

  for (const double amp : {75.0, -75.0, 50.0, -50.0}) {
    ScenarioConfig p = noise;
    p.name = std::string("push_") + (amp > 0 ? "p" : "m") +
             std::to_string(static_cast<int>(std::abs(amp)));
    p.pushes.push_back({{amp, amp}, 2.2, 0.01});
    out.push_back(p);
  }
  return out;
}

const ScenarioConfig* find_scenario(const std::vector<ScenarioConfig>& set,
                                    const std::string& name) {
  for (const auto& cfg : set) {
    if (cfg.name == name) return &cfg;
  }
  return nullptr;
}

void emit_csv(const Trace& trace, const std::string& path) {
  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("emit_csv: cannot open " + path);
  }
  file << "time,x_zmp_ref,x_zmp_true,x_zmp_meas,x_com_pos,x_com_vel,"
          "x_com_acc,x_dcm,x_jerk,y_zmp_ref,y_zmp_true,y_zmp_meas,"
          "y_com_pos,y_com_vel,y_com_acc,y_dcm,y_jerk,z_ref,qp_status,"
          "step_index,adj_land_x,adj_land_y\n";
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    file << buf << sep;
  };
  for (const TraceRow& r : trace.rows) {
    put(r.time, ',');
    for (int a = 0; a < 2; ++a) {
      put(r.zmp_ref[a], ',');
      put(r.zmp_true[a], ',');
      put(r.zmp_meas[a], ',');
      put(r.com_pos[a], ',');
      put(r.com_vel[a], ',');
      put(r.com_acc[a], ',');
      put(r.dcm[a], ',');
      put(r.jerk[a], ',');
    }
    put(r.z_ref, ',');
    file << r.qp_status << ',' << r.step_index << ',';
    put(r.adj_land[0], ',');
    std::snprintf(buf, sizeof(buf), "%.9g", r.adj_land[1]);
    file << buf << '\n';
  }
  if (!file) {
    throw std::runtime_error("emit_csv: write failed for " + path);
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void assign_key(ScenarioConfig& cfg, const std::string& key,
                const std::string& value) {
  auto as_double = [&] {
    size_t used = 0;
    const double v = std::stod(value, &used);
    return v;
  };
  auto as_int = [&] { return std::stoi(value); };

  if (key == "name") {
    cfg.name = value;
  } else if (key == "step_width") {
    cfg.step_width = as_double();
  } else if (key == "step_length") {
    cfg.step_length = as_double();
  } else if (key == "t_ss") {
    cfg.t_ss = as_double();
  } else if (key == "t_ds") {
    cfg.t_ds = as_double();
  } else if (key == "foot_length") {
    cfg.foot_length = as_double();
  } else if (key == "z_c0") {
    cfg.z_c0 = as_double();
  } else if (key == "a_ss") {
    cfg.a_ss = as_double();
  } else if (key == "a_ds") {
    cfg.a_ds = as_double();
  } else if (key == "delta_z_c") {
    cfg.delta_z_c = as_double();
  } else if (key == "sample_time") {
    cfg.sample_time = as_double();
  } else if (key == "np") {
    cfg.np = as_int();
  } else if (key == "nc") {
    cfg.nc = as_int();
  } else if (key == "steps") {
    cfg.steps = as_int();
  } else if (key == "stair_rise") {
    cfg.stair_rise = as_double();
  } else if (key == "noise_bound") {
    cfg.noise_bound = as_double();
  } else if (key == "noise_sigma") {
    cfg.noise_sigma = as_double();
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (key == "plant_height_offset") {
    cfg.plant_height_offset = as_double();
  } else if (key == "mass") {
    cfg.mass = as_double();
  } else if (key == "gravity") {
    cfg.gravity = as_double();
  } else if (key == "rho") {
    cfg.rho = as_double();
  } else if (key == "jerk_limit") {
    cfg.jerk_limit = as_double();
  } else if (key == "rate_limit") {
    cfg.rate_limit = as_double();
  } else if (key == "compliance_margin") {
    cfg.compliance_margin = as_double();
  } else if (key == "reach_x") {
    cfg.reach_x = as_double();
  } else if (key == "reach_y_inner") {
    cfg.reach_y_inner = as_double();
  } else if (key == "reach_y_outer") {
    cfg.reach_y_outer = as_double();
  } else if (key == "terminal_weight") {
    cfg.terminal_weight = as_double();
  } else if (key == "slack_hard_window") {
    cfg.slack_hard_window = as_int();
  } else if (key == "slack_weight") {
    cfg.slack_weight = as_double();
  } else if (key == "qp_max_iter") {
    cfg.qp_max_iter = as_int();
  } else if (key == "kf_q_pos") {
    cfg.kf_q_pos = as_double();
  } else if (key == "kf_q_vel") {
    cfg.kf_q_vel = as_double();
  } else if (key == "kf_q_acc") {
    cfg.kf_q_acc = as_double();
  } else if (key == "kf_r") {
    cfg.kf_r = as_double();
  } else if (key == "push") {
    std::istringstream in(value);
    Disturbance d;
    if (!(in >> d.force.x() >> d.force.y() >> d.start >> d.duration)) {
      throw std::runtime_error(
          "config: push expects \"fx fy start duration\", got: " + value);
    }
    cfg.pushes.push_back(d);
  } else {
    throw std::runtime_error("config: unknown key '" + key + "'");
  }
}

}  // namespace

ScenarioConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("load_config: cannot open " + path);
  }
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(file, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("load_config: line " + std::to_string(lineno) +
                               " is not 'key = value'");
    }
    assign_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::runtime_error("override must be key=value: " + assignment);
  }
  assign_key(cfg, trim(assignment.substr(0, eq)),
             trim(assignment.substr(eq + 1)));
}

}  // namespace tvmpc
