#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platelab/isometry.hpp"
#include "platelab/load.hpp"

namespace platelab {

// Validated run configuration; parsed from a JSON document against a fixed
// schema (unknown keys rejected, tolerances positive).
struct RunConfig {
    // domain and resolution
    double x1min = -0.5, x1max = 0.5, x2min = -0.5, x2max = 0.5;
    int grid_n = 65;

    // load: catalog id ("tilt", "runaway", "incompatible", "zero_moment")
    // or "file" with a node-array path
    std::string load_id = "tilt";
    double load_scale = 1.0;
    double load_k = 40.0;  // transverse weight of the "incompatible" load
    std::string load_file;

    // material constants
    double lambda = 1.0, mu = 1.0;

    // command options
    std::vector<double> h_values = {0.2, 0.1, 0.05, 0.02};
    std::vector<double> gammas = {1, 2, 4, 8};
    double eps = 0.1;
    std::uint64_t seed = 0;
    int starts = 8;
    int max_iter = 500;
    double amplitude = 0.1;
    std::string family = "vk";    // scaling: "vk", "kl", "kl_sqrt", "rigid"
    std::string profile = "sine"; // embed: "flat", "sine", "ridge", "bump"
    double profile_amplitude = 0.2;

    // tolerance overrides (all positive)
    double tau_iso = 1e-4;
    double tau_grad = 1e-8;

    std::string canonical;  // sorted-key serialization of the parsed document
};

// Parses and validates a JSON document; error messages carry the offending
// key or byte position.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

// FNV-1a hash of the canonical serialization plus the effective seed.
std::string config_hash(const RunConfig& cfg);

Grid2D config_grid(const RunConfig& cfg);
Load build_load(const RunConfig& cfg);
Load build_load(const RunConfig& cfg, const Grid2D& g);  // resolution override
ScalarField2D build_profile(const RunConfig& cfg);

}  // namespace platelab
