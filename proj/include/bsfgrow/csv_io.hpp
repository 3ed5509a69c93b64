#pragma once

#include <string>

#include "bsfgrow/estimator.hpp"
#include "bsfgrow/observability.hpp"
#include "bsfgrow/sim.hpp"

namespace bsfgrow {

// All writers emit a header row and '%.17g' numbers, which round-trip
// doubles exactly; given identical inputs the files are byte-identical.
// Readers validate the header and throw ConfigError with line context on
// malformed rows.

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

void write_measurements_csv(const std::string& path, const MeasurementSeries& m);
MeasurementSeries read_measurements_csv(const std::string& path);

void write_curve_csv(const std::string& path, const CurveTrace& trace);

void write_estimates_csv(const std::string& path, const EstimateSeries& est);

}  // namespace bsfgrow
