/*
 * report.hpp — diffable run reports and CSV exports.
 *
 * Reports are JSON (schema "bistab-run/1").  Identical configs and seeds
 * produce byte-identical documents except for the top-level "timestamp"
 * field; everything numeric is serialized with shortest-round-trip
 * formatting.  CSV exports use 12 significant digits (%.11e).
 */

#pragma once

#include <string>

#include <json.hpp>

#include "bistab/config.hpp"
#include "bistab/control.hpp"
#include "bistab/models.hpp"
#include "bistab/stabilization.hpp"

namespace bistab {

using json = nlohmann::ordered_json;

std::string iso_timestamp();

// Config echo: every effective value, defaults included.
json config_json(const RunConfig& cfg);

json model_json(const SpectralModel& model);
json hypothesis_json(const HypothesisReport& rep);
json family_json(const BiorthogonalFamily& family);
json certificate_json(const CertificateReport& cert);

// Full stabilization report (windows, fits when available, constant chain).
json run_report_json(const StabilizationRun& run, const FittedConstants* fitted,
                     const StabilizationConstants* constants, const RunConfig& cfg);

void write_json(const json& doc, const std::string& path);

// CSV of (n, ||v(nT)||, ||p||_n, certificate bound, energy flag).
void write_windows_csv(const StabilizationRun& run, const std::string& path);

// Ascii trajectory table: header, then (t, a_1, ..., a_N) rows, %.11e.
void write_trajectory(const Trajectory& traj, const std::string& path);

}  // namespace bistab
