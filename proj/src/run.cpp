#include "ppqme/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <utility>

#include <json.hpp>

#include "ppqme/errors.hpp"
#include "ppqme/inhomogeneous.hpp"
#include "ppqme/oracle.hpp"
#include "ppqme/relaxation.hpp"
#include "ppqme/units.hpp"

namespace ppqme::run {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string join_path(const std::string& out_dir, const std::string& name) {
  const fs::path p(name);
  const fs::path full = p.is_absolute() ? p : fs::path(out_dir) / p;
  if (full.has_parent_path()) fs::create_directories(full.parent_path());
  return full.string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical newlines
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  return out;
}

std::vector<std::pair<int, int>> coherence_pairs(const Eigen::MatrixXcd& sigma0) {
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < sigma0.rows(); ++j) {
    for (int k = j + 1; k < sigma0.cols(); ++k) {
      if (sigma0(j, k) != cd{0.0, 0.0} || sigma0(k, j) != cd{0.0, 0.0}) pairs.push_back({j, k});
    }
  }
  return pairs;
}

void write_trajectory_csv(const std::string& path, const PolaronFrame& frame,
                          const Trajectory& traj) {
  const int n = traj.n_sites;
  auto out = open_out(path);
  out << "t_fs";
  for (int j = 1; j <= n; ++j) out << ",P_" << j;
  for (int p = 1; p <= n; ++p) {
    for (int q = p + 1; q <= n; ++q) {
      out << ",Re_sigma_tilde_" << p << "_" << q << ",Im_sigma_tilde_" << p << "_" << q;
    }
  }
  out << ",trace,min_eigenvalue\n";
  for (size_t i = 0; i < traj.t_fs.size(); ++i) {
    const double t = traj.t_fs[i];
    out << fmt(t);
    for (int j = 0; j < n; ++j) out << "," << fmt(traj.sigma_site[i](j, j).real());
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        // Schroedinger-picture eigenbasis coherence: restore the removed
        // oscillation e^{-i dE_pq t / hbar}.
        const cd v = std::polar(1.0, -frame.gaps(p, q) * t / units::hbar_cmfs) *
                     traj.s_eigen[i](p, q);
        out << "," << fmt(v.real()) << "," << fmt(v.imag());
      }
    }
    out << "," << fmt(traj.trace[i]) << "," << fmt(traj.min_eigenvalue[i]) << "\n";
  }
}

void write_run_json(const std::string& path, const RunConfig& cfg, const PolaronFrame& frame,
                    const Trajectory& traj) {
  using nlohmann::json;
  const int n = frame.n_sites();
  json doc;
  doc["config"] = json::parse(cfg.echo);

  json fr;
  fr["renormalized_energies_cm1"] = std::vector<double>(
      frame.e_tilde.data(), frame.e_tilde.data() + n);
  auto mat = [](const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    }
    return rows;
  };
  fr["debye_waller"] = mat(frame.w);
  fr["dressed_couplings_cm1"] = mat(frame.j_tilde);
  fr["eigenvalues_cm1"] =
      std::vector<double>(frame.eigenvalues.data(), frame.eigenvalues.data() + n);
  fr["eigenvectors_site_by_state"] = mat(frame.u);
  doc["frame"] = fr;

  json diag;
  diag["n_steps"] = cfg.grid().n_steps;
  diag["dt_fs"] = cfg.dt_fs;
  diag["samples_recorded"] = traj.t_fs.size();
  diag["max_trace_drift"] = traj.max_trace_drift;
  diag["max_hermiticity_error"] = traj.max_herm_error;
  diag["min_eigenvalue"] = traj.min_eigenvalue_run;
  doc["diagnostics"] = diag;

  doc["note"] =
      "Site populations are invariant under the partial displacement transformation; "
      "reported coherences live in the transformed frame and differ from bare-frame "
      "coherences unless the Debye-Waller factors equal one.";

  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

}  // namespace

SimulateArtifacts simulate(const RunConfig& cfg, const std::string& out_dir) {
  const TimeGrid grid = cfg.grid();
  const QuadratureScheme scheme = cfg.quadrature();

  PolaronFrame frame = build_frame(cfg.system, cfg.bath, cfg.weighting, scheme, cfg.temperature_K);
  const CorrelationTables tables =
      build_tables(cfg.bath, cfg.weighting, scheme, grid, cfg.temperature_K,
                   cfg.system.coupling_pairs(), coherence_pairs(cfg.initial));
  const KernelIntegrals ki = kernel_integrals(tables, frame);
  const InhomKernels inhom =
      build_inhom(tables, frame, cfg.system.couplings, cfg.initial, cfg.inhom_order);

  PropagationOptions options;
  options.stride = cfg.stride;
  Trajectory traj = propagate(ki, frame, inhom, cfg.initial, options);

  SimulateArtifacts art;
  art.csv_path = join_path(out_dir, cfg.csv_path.empty() ? "trajectory.csv" : cfg.csv_path);
  if (!cfg.json_path.empty()) {
    art.json_path = join_path(out_dir, cfg.json_path);
  } else {
    fs::path p(art.csv_path);
    p.replace_extension(".json");
    art.json_path = p.string();
  }
  write_trajectory_csv(art.csv_path, frame, traj);
  write_run_json(art.json_path, cfg, frame, traj);
  art.trajectory = std::move(traj);
  art.frame = std::move(frame);
  return art;
}

SweepResult sweep(const RunConfig& base, const std::string& parameter,
                  const std::vector<double>& values, const std::string& out_dir) {
  if (parameter != "omega_h" && parameter != "alpha") {
    throw ConfigError("sweep parameter must be 'omega_h' or 'alpha'");
  }
  if (parameter == "alpha" && base.weighting.kind != WeightingKind::Smooth) {
    throw ConfigError("sweep parameter 'alpha' requires smooth weighting");
  }
  if (parameter == "omega_h" && base.weighting.kind != WeightingKind::Step &&
      base.weighting.kind != WeightingKind::Smooth) {
    throw ConfigError("sweep parameter 'omega_h' requires step or smooth weighting");
  }

  SweepResult result;
  for (size_t i = 0; i < values.size(); ++i) {
    SweepPoint point;
    point.value = values[i];
    RunConfig cfg = base;
    char tag[64];
    std::snprintf(tag, sizeof tag, "sweep_%s_%02zu.csv", parameter.c_str(), i);
    cfg.csv_path = tag;
    cfg.json_path.clear();
    try {
      if (!(values[i] > 0.0)) throw ConfigError("sweep value must be > 0");
      if (parameter == "omega_h") {
        cfg.weighting.omega_h = values[i];
      } else {
        cfg.weighting.alpha = values[i];
      }
      check_weighting_policy(cfg.bath, cfg.weighting, cfg.allow_divergent_alpha);
      SimulateArtifacts art = simulate(cfg, out_dir);
      const std::vector<double> p1 = art.trajectory.population(0);
      point.metric = coherence_metric(art.trajectory.t_fs, p1);
      point.p1_long_time = p1.back();
      point.csv_path = art.csv_path;
      point.ok = true;
    } catch (const Error& e) {
      point.error = e.what();
    }
    result.points.push_back(std::move(point));
  }

  result.summary_path = join_path(out_dir, "sweep_summary.csv");
  auto out = open_out(result.summary_path);
  out << "parameter,value,status,coherence_metric,P1_long_time\n";
  for (const SweepPoint& p : result.points) {
    out << parameter << "," << fmt(p.value) << "," << (p.ok ? "ok" : "failed") << ","
        << (p.ok ? fmt(p.metric) : "") << "," << (p.ok ? fmt(p.p1_long_time) : "") << "\n";
  }
  return result;
}

std::string dump_correlations(const RunConfig& cfg, const std::string& out_dir) {
  const TimeGrid grid = cfg.grid();
  const CorrelationTables tables =
      build_tables(cfg.bath, cfg.weighting, cfg.quadrature(), grid, cfg.temperature_K,
                   cfg.system.coupling_pairs(), coherence_pairs(cfg.initial));

  const std::string path =
      join_path(out_dir, cfg.csv_path.empty() ? "correlations.csv" : cfg.csv_path);
  auto out = open_out(path);

  out << "t_fs";
  for (const auto& [key, value] : tables.k_table()) {
    (void)value;
    const std::string tag = std::to_string(key.a1 + 1) + "_" + std::to_string(key.b1 + 1) +
                            "_" + std::to_string(key.a2 + 1) + "_" + std::to_string(key.b2 + 1);
    out << ",Re_K_" << tag << ",Im_K_" << tag;
  }
  for (const auto& [key, value] : tables.m_table()) {
    (void)value;
    const std::string tag = std::to_string(key.j + 1) + "_" + std::to_string(key.a + 1) + "_" +
                            std::to_string(key.b + 1);
    out << ",Re_M_" << tag << ",Im_M_" << tag;
  }
  for (const auto& [key, value] : tables.c_table()) {
    (void)value;
    const std::string tag = std::to_string(key.a + 1) + "_" + std::to_string(key.b + 1);
    out << ",Re_C_" << tag << ",Im_C_" << tag;
  }
  for (const auto& [key, value] : tables.f_table()) {
    (void)value;
    const std::string tag = std::to_string(key.a + 1) + "_" + std::to_string(key.b + 1) + "_" +
                            std::to_string(key.kp + 1);
    out << ",Re_f_" << tag << ",Im_f_" << tag;
  }
  for (const auto& [key, value] : tables.h_table()) {
    (void)value;
    out << ",h_" << key.a + 1 << "_" << key.b + 1;
  }
  out << "\n";

  for (int m = 0; m < grid.n_samples(); ++m) {
    out << fmt(grid.time_at(m));
    for (const auto& [key, v] : tables.k_table()) {
      (void)key;
      out << "," << fmt(v[m].real()) << "," << fmt(v[m].imag());
    }
    for (const auto& [key, v] : tables.m_table()) {
      (void)key;
      out << "," << fmt(v[m].real()) << "," << fmt(v[m].imag());
    }
    for (const auto& [key, v] : tables.c_table()) {
      (void)key;
      out << "," << fmt(v[m].real()) << "," << fmt(v[m].imag());
    }
    for (const auto& [key, v] : tables.f_table()) {
      (void)key;
      out << "," << fmt(v[m].real()) << "," << fmt(v[m].imag());
    }
    for (const auto& [key, v] : tables.h_table()) {
      (void)key;
      out << "," << fmt(v[m]);
    }
    out << "\n";
  }
  return path;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

namespace {

void add_check(ValidationReport& report, const std::string& name, double residual,
               double tolerance) {
  ValidationCheck check{name, residual, tolerance, residual <= tolerance};
  report.all_pass = report.all_pass && check.pass;
  report.checks.push_back(std::move(check));
}

double table_max_abs(const CorrelationTables& tables, char which) {
  double mx = 0.0;
  if (which == 'K') {
    for (const auto& [k, v] : tables.k_table()) {
      (void)k;
      for (const cd& x : v) mx = std::max(mx, std::abs(x));
    }
  } else if (which == 'M') {
    for (const auto& [k, v] : tables.m_table()) {
      (void)k;
      for (const cd& x : v) mx = std::max(mx, std::abs(x));
    }
  } else if (which == 'C') {
    for (const auto& [k, v] : tables.c_table()) {
      (void)k;
      for (const cd& x : v) mx = std::max(mx, std::abs(x));
    }
  } else if (which == 'h') {
    for (const auto& [k, v] : tables.h_table()) {
      (void)k;
      for (const double x : v) mx = std::max(mx, std::abs(x));
    }
  }
  return mx;
}

}  // namespace

ValidationReport validate(bool corrupt_w) {
  ValidationReport report;

  // Shared dimer scenario: resonant sites, J = 300 cm^-1, Ohmic density with
  // omega_c = 200 cm^-1, T = 300 K.
  const SiteHamiltonian system = SiteHamiltonian::dimer(0.0, 0.0, 300.0);
  const SpectralDensityModel density = SpectralDensityModel::ohmic_exponential(2, 1.0, 200.0);
  const double temperature = 300.0;
  // dt = 0.1 fs keeps the fourth-order time integration below 1e-12 so the
  // bare-limit comparison against the analytic reference is meaningful.
  TimeGrid grid;
  grid.dt_fs = 0.1;
  grid.n_steps = 1000;  // 100 fs
  QuadratureScheme scheme;
  scheme.t_max_fs = grid.t_max();

  // --- step-weighting scenario -------------------------------------------
  {
    const WeightingFunction weighting = WeightingFunction::step(200.0);
    const PolaronFrame frame = build_frame(system, density, weighting, scheme, temperature);
    const CorrelationTables tables = build_tables(density, weighting, scheme, grid, temperature,
                                                  system.coupling_pairs());

    // Debye-Waller consistency: w_jk = exp(-K_jkjk(0)/2).
    double w01 = frame.w(0, 1);
    if (corrupt_w) w01 *= 1.01;  // negative control
    const double w_expected = std::exp(-0.5 * tables.corr_K(0, 1, 0, 1, 0).real());
    add_check(report, "debye_waller_consistency", std::abs(w01 - w_expected), 1e-12);

    // Pure step transformation leaves no linear residual channel.
    add_check(report, "step_M_channel_zero", table_max_abs(tables, 'M'), 1e-14);

    // t = 0 samples of K, M, C are real.
    double im0 = 0.0;
    for (const auto& [k, v] : tables.k_table()) {
      (void)k;
      im0 = std::max(im0, std::abs(v[0].imag()));
    }
    for (const auto& [k, v] : tables.c_table()) {
      (void)k;
      im0 = std::max(im0, std::abs(v[0].imag()));
    }
    add_check(report, "tables_real_at_t0", im0, 1e-14);

    // Phase factors keep unit modulus everywhere.
    double fmod = 0.0;
    for (const auto& [k, v] : tables.f_table()) {
      (void)k;
      for (const cd& x : v) fmod = std::max(fmod, std::abs(std::abs(x) - 1.0));
    }
    add_check(report, "f_unit_modulus", fmod, 1e-14);

    const KernelIntegrals ki = kernel_integrals(tables, frame);

    // R(0) = 0: all kernel chains start at zero.
    add_check(report, "relaxation_zero_at_t0",
              assemble_R(ki, frame, 0).r.cwiseAbs().maxCoeff(), 1e-14);

    // Trace conservation: columns of R sum to zero over p = q.
    const RelaxationTensor rt = assemble_R(ki, frame, 200);  // t = 10 fs
    double colsum = 0.0;
    for (int pp = 0; pp < 2; ++pp) {
      for (int qq = 0; qq < 2; ++qq) {
        cd s{0.0, 0.0};
        for (int p = 0; p < 2; ++p) s += rt.element(p, p, pp, qq);
        colsum = std::max(colsum, std::abs(s));
      }
    }
    add_check(report, "trace_conservation_column_sums", colsum, 1e-15);

    // Closed-form two-state assembly against the general contraction.
    const RelaxationTensor rt2 = assemble_R_two_state(ki, frame, 200);
    add_check(report, "two_state_equals_general", (rt.r - rt2.r).cwiseAbs().maxCoeff(), 1e-12);
  }

  // --- zero-weighting scenario (bare-coupling limit) -----------------------
  {
    const WeightingFunction weighting = WeightingFunction::zero();
    const PolaronFrame frame = build_frame(system, density, weighting, scheme, temperature);
    const CorrelationTables tables = build_tables(density, weighting, scheme, grid, temperature,
                                                  system.coupling_pairs());

    double limit = std::max({table_max_abs(tables, 'K'), table_max_abs(tables, 'M'),
                             table_max_abs(tables, 'h')});
    double fdev = 0.0;
    for (const auto& [k, v] : tables.f_table()) {
      (void)k;
      for (const cd& x : v) fdev = std::max(fdev, std::abs(x - cd{1.0, 0.0}));
    }
    add_check(report, "zero_weighting_tables_trivial", std::max(limit, fdev), 1e-14);

    const KernelIntegrals ki = kernel_integrals(tables, frame);
    const int m = 200;  // t = 10 fs
    const RelaxationTensor rt = assemble_R(ki, frame, m);
    const Eigen::MatrixXcd ref =
        conventional_R(density, scheme, frame, temperature, grid.time_at(m));
    add_check(report, "bare_limit_matches_reference", (rt.r - ref).cwiseAbs().maxCoeff(), 1e-10);

    // No transformation, thermal product start: the driving term vanishes.
    Eigen::MatrixXcd sigma0 = Eigen::MatrixXcd::Zero(2, 2);
    sigma0(0, 0) = 0.5;
    sigma0(0, 1) = sigma0(1, 0) = 0.5;
    sigma0(1, 1) = 0.5;
    const CorrelationTables tables_c = build_tables(density, weighting, scheme, grid, temperature,
                                                    system.coupling_pairs(), {{0, 1}});
    add_check(report, "zero_weighting_driving_vanishes",
              inhom1(tables_c, frame, sigma0, m).cwiseAbs().maxCoeff(), 1e-14);
  }

  // --- unity-weighting scenarios ------------------------------------------
  {
    // Cubic low-frequency density: the full transformation converges and
    // kills the linear channels.
    const double wc = 200.0;
    const double pref = std::numbers::pi / (wc * wc);
    const SpectralDensityModel cubic = SpectralDensityModel::from_function(
        2, [pref, wc](double w) { return pref * w * w * w * std::exp(-w / wc); }, 3.0, wc);
    const WeightingFunction weighting = WeightingFunction::unity();
    const CorrelationTables tables =
        build_tables(cubic, weighting, scheme, grid, temperature, system.coupling_pairs());
    add_check(report, "full_weighting_linear_channels_zero",
              std::max(table_max_abs(tables, 'M'), table_max_abs(tables, 'C')), 1e-14);

    // Ohmic density + full transformation: the displacement variance
    // diverges and must be reported, not silently truncated.
    bool raised = false;
    try {
      (void)build_tables(density, weighting, scheme, grid, temperature, system.coupling_pairs());
    } catch (const DivergentIntegral&) {
      raised = true;
    }
    add_check(report, "full_weighting_ohmic_divergence_detected", raised ? 0.0 : 1.0, 0.5);
  }

  return report;
}

void print_report(const ValidationReport& report, std::ostream& os) {
  size_t failed = 0;
  for (const ValidationCheck& check : report.checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%-42s %s  residual=%10.3e  tol=%8.1e",
                  check.name.c_str(), check.pass ? "PASS" : "FAIL", check.residual,
                  check.tolerance);
    os << line << "\n";
    if (!check.pass) ++failed;
  }
  if (failed == 0) {
    os << "all " << report.checks.size() << " checks passed\n";
  } else {
    os << failed << " of " << report.checks.size() << " checks FAILED\n";
  }
}

}  // namespace ppqme::run
