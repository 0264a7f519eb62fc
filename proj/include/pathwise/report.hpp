#pragma once

// File formats: numeric CSV (%.17g, byte-stable across reruns and thread
// counts), the TPTH binary batch container, and the JSON metadata sidecar
// written next to every data file.
//
// TPTH layout (little-endian): magic "TPTH", u32 version (1), u32 count,
// u32 steps, f64 horizon, then count rows of (steps + 1) f64 values.

#include <string>
#include <vector>

#include "pathwise/path.hpp"

namespace pathwise {

// One row may be shorter than the header (trailing cells left empty).
void write_csv(const std::string& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& footer_lines = {});

void write_path_csv(const std::string& file, const SampledPath& p);
SampledPath read_path_csv(const std::string& file);

void write_tpth(const std::string& file, const PathBatch& batch);
PathBatch read_tpth(const std::string& file);

// Writes `<data_file>.meta.json` with the effective configuration, the build
// version, and the wall-clock duration. config_json must be a serialized JSON
// object; duration is appended by this helper.
void write_meta_sidecar(const std::string& data_file, const std::string& config_json,
                        double wall_seconds);

std::string version_string();

// Shared formatting for all numeric output ("%.17g").
std::string format_double(double v);

}  // namespace pathwise
