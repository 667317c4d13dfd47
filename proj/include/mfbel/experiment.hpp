#pragma once

#include <iosfwd>

#include "mfbel/config.hpp"
#include "mfbel/validate.hpp"

namespace mfbel {

/// Runs compare_methods for the config and writes estimates.csv, trace.csv,
/// config.yaml (the resolved config) and, when requested, paths.csv into
/// config.output. Prints one summary line per method to `out`.
/// Returns 0 unless every method failed.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Writes curves.csv (analytic and particle curves side by side, sup-norm
/// distance in the footer row), analytic_curves.csv and particle_curves.csv.
/// Returns 3 with the iteration diagnostics on NoConvergence.
int cmd_meanfield(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Runs the validation suite; nonzero when any named check fails.
int cmd_validate(const ValidationOptions& options, std::ostream& out);

}  // namespace mfbel
