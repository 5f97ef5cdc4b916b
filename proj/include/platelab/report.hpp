#pragma once

#include "json.hpp"
#include "platelab/config.hpp"
#include "platelab/stability.hpp"

namespace platelab {

// One function per CLI command; each returns the full report document
// (sorted keys, so serialization is deterministic for a fixed config and
// seed) and writes its side artifacts (node arrays, CSV) into out_dir.
nlohmann::json cmd_analyze_load(const RunConfig& cfg);
nlohmann::json cmd_stability(const RunConfig& cfg);
nlohmann::json cmd_minimize(const RunConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_scaling(const RunConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_embed(const RunConfig& cfg, const std::string& out_dir);

// Flat text node arrays, row-major with x1 fastest:
// "# field n1 n2 x1min x1max x2min x2max cols" then one line per node.
void write_field(const std::string& path, const Grid2D& g,
                 const Eigen::MatrixXd& values);
VectorField2D read_field(const std::string& path);

void write_text(const std::string& path, const std::string& text);

}  // namespace platelab
