#include "mfbel/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "mfbel/estimators.hpp"
#include "mfbel/meanfield.hpp"
#include "mfbel/sde.hpp"

namespace mfbel {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::invalid_argument, "cannot write '" + path.string() + "'");
  return file;
}

void dump_paths(const ModelSpec& model, const RunConfig& config, const std::filesystem::path& dir) {
  const EstimatorConfig ec = config.estimator_config();
  const TimeGrid grid = ec.grid();
  const MeanFieldCurves curves = curves_for(model, ec.x0, ec);
  std::ofstream file = open_output(dir / "paths.csv");
  file << "path,t,W,X,Y,J\n" << std::setprecision(17);
  for (std::size_t p = 0; p < std::min(config.dump_paths, config.n_paths); ++p) {
    const NoiseGrid noise = gen_noise(ec.seed, p, grid);
    const PathBundle b = simulate_path(model.simulation_dynamics(), model, curves, ec.x0, grid, noise, ec.scheme);
    double w = 0.0;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      if (i > 0) w += noise.increments[i - 1];
      file << p << ',' << grid.time(i) << ',' << w << ',' << b.x_path[i] << ',' << b.tangent.y[i] << ','
           << b.jac_path[i] << '\n';
    }
  }
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  validate_config(config);
  const ModelSpec model = build_model(config.model, config.params);
  const std::filesystem::path dir(config.output);
  std::filesystem::create_directories(dir);

  const EstimatorConfig ec = config.estimator_config();
  const std::vector<double> h_list = config.has_method("fd") ? config.h_list : std::vector<double>{};
  const auto rows = compare_methods(model, config.payoff_spec(), ec, h_list, config.compare_options());

  {
    std::ofstream file = open_output(dir / "estimates.csv");
    write_estimates_csv(file, rows);
  }
  {
    std::ofstream file = open_output(dir / "trace.csv");
    write_trace_csv(file, rows);
  }
  {
    std::ofstream file = open_output(dir / "config.yaml");
    file << serialize_config(config);
  }
  if (config.dump_paths > 0) dump_paths(model, config, dir);

  std::size_t failures = 0;
  for (const auto& row : rows) {
    if (!row.result) {
      ++failures;
      err << row.label << ": failed: " << row.error << '\n';
      continue;
    }
    const DeltaEstimate& e = row.result->estimate;
    out << std::left << std::setw(22) << row.label << std::right << " delta " << std::setprecision(8) << e.value
        << "  se " << std::setprecision(4) << e.std_error << "  n " << e.n_paths << '\n';
  }
  out << "wrote " << (dir / "estimates.csv").string() << " and " << (dir / "trace.csv").string() << '\n';
  return !rows.empty() && failures == rows.size() ? 1 : 0;
}

int cmd_meanfield(const RunConfig& config, std::ostream& out, std::ostream& err) {
  validate_config(config);
  const ModelSpec model = build_model(config.model, config.params);
  const std::filesystem::path dir(config.output);
  std::filesystem::create_directories(dir);

  const EstimatorConfig ec = config.estimator_config();
  const TimeGrid grid = ec.grid();
  require(static_cast<bool>(model.analytic_curves), "model '" + model.id + "' has no analytic curves");
  const MeanFieldCurves analytic = model.analytic_curves(ec.x0, grid);

  FixedPointDiagnostics diagnostics;
  MeanFieldCurves particle;
  try {
    particle = particle_fixed_point(model, ec.x0, grid, ec.particles, &diagnostics);
  } catch (const NoConvergence& e) {
    err << "particle fixed point did not converge: " << e.iterations() << " iterations, last sup-norm step "
        << e.distance() << " (tol " << config.particle_tol << ")\n";
    return 3;
  }
  const double distance = sup_distance(analytic, particle);

  {
    std::ofstream file = open_output(dir / "analytic_curves.csv");
    write_curves_csv(file, analytic, grid);
  }
  {
    std::ofstream file = open_output(dir / "particle_curves.csv");
    write_curves_csv(file, particle, grid);
  }
  {
    std::ofstream file = open_output(dir / "curves.csv");
    file << "t,rho_analytic,rho_particle,pi_analytic,pi_particle,drho_dx_analytic,drho_dx_particle,"
            "dpi_dx_analytic,dpi_dx_particle\n"
         << std::setprecision(17);
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      file << grid.time(i) << ',' << analytic.rho[i] << ',' << particle.rho[i] << ',' << analytic.pi[i] << ','
           << particle.pi[i] << ',' << analytic.drho_dx[i] << ',' << particle.drho_dx[i] << ','
           << analytic.dpi_dx[i] << ',' << particle.dpi_dx[i] << '\n';
    }
    file << "sup_distance," << distance << ",,,,,,,\n";
  }

  out << "particle fixed point: " << diagnostics.iterations << " iterations, last step " << diagnostics.final_distance
      << '\n'
      << "sup-norm distance to the analytic curves: " << distance << '\n'
      << "wrote " << (dir / "curves.csv").string() << '\n';
  return 0;
}

int cmd_validate(const ValidationOptions& options, std::ostream& out) {
  out << "validation level " << to_string(options.level) << '\n';
  const ValidationReport report = run_validation(options, &out);
  const auto failed = report.failed_names();
  out << report.checks.size() - failed.size() << '/' << report.checks.size() << " checks passed\n";
  for (const auto& name : failed) out << "failed: " << name << '\n';
  return failed.empty() ? 0 : 1;
}

}  // namespace mfbel
