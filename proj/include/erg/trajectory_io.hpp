#pragma once

#include <filesystem>
#include <string>

#include "erg/simulation.hpp"

namespace erg {

/// Exact trajectory CSV: header then one row per sample, columns
/// t, x0..x{n-1}, g0..g{m-1}, r0..r{m-1}, V, gamma_min, c0..c{nc-1},
/// nu, phi, sigma, limiter, gamma. Floats carry 17 significant digits and
/// are rendered with std::to_chars, so output is locale-independent and
/// byte-stable for identical runs.
std::string trajectory_csv(const Trajectory& traj);

/// Diff-friendly key=value lines, one metric per line.
std::string metrics_text(const Metrics& metrics);

/// Atomic write: temp file in the target directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Serializes one double with 17 significant digits.
std::string format_double(double v);

}  // namespace erg
