#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "neuroperf/stepper.hpp"

namespace neuroperf {

// Legacy ASCII VTK unstructured grid with triangle cells. Cell data: elementwise means of
// u, u_tilde, p_A, p_C, p_V (Pa) and CBF_reduction. With `point_data`, vertices are
// duplicated per element and the element polynomials are also sampled at the corners.
// Values use %.9e, so output is byte-stable for a fixed state.
void write_vtk_snapshot(Simulation& sim, const SimulationState& state, std::ostream& out, bool point_data = false);
void write_vtk_snapshot(Simulation& sim, const SimulationState& state, const std::filesystem::path& path,
                        bool point_data = false);

// Header plus one row per entry; classification is the outcome as of that row.
void write_timeseries_csv(std::span<const Diagnostics> rows, std::ostream& out);
void write_timeseries_csv(std::span<const Diagnostics> rows, const std::filesystem::path& path);

// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(std::string_view s);

}  // namespace neuroperf
