#include "platelab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "platelab/report.hpp"

namespace platelab {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const char* section,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok)
            throw InputError(std::string("config: unknown key \"") + it.key() +
                             "\" in section \"" + section + "\"");
    }
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("config: bad value for \"") + key + "\": " +
                         e.what());
    }
}

void require_positive(double v, const char* what) {
    if (!(v > 0)) throw InputError(std::string("config: ") + what + " must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config: parse error: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("config: top level must be an object");
    check_keys(doc, "top", {"domain", "load", "model", "options", "tolerances"});

    RunConfig cfg;
    if (doc.contains("domain")) {
        const json& d = doc["domain"];
        check_keys(d, "domain", {"x1min", "x1max", "x2min", "x2max", "n"});
        take(d, "x1min", cfg.x1min);
        take(d, "x1max", cfg.x1max);
        take(d, "x2min", cfg.x2min);
        take(d, "x2max", cfg.x2max);
        take(d, "n", cfg.grid_n);
        if (cfg.x1max <= cfg.x1min || cfg.x2max <= cfg.x2min)
            throw InputError("config: empty domain");
        if (cfg.grid_n < 3) throw InputError("config: grid n must be at least 3");
    }
    if (doc.contains("load")) {
        const json& l = doc["load"];
        check_keys(l, "load", {"id", "scale", "k", "file"});
        take(l, "id", cfg.load_id);
        take(l, "scale", cfg.load_scale);
        take(l, "k", cfg.load_k);
        take(l, "file", cfg.load_file);
        if (cfg.load_id == "file" && cfg.load_file.empty())
            throw InputError("config: load id \"file\" needs a \"file\" path");
    }
    if (doc.contains("model")) {
        const json& m = doc["model"];
        check_keys(m, "model", {"lambda", "mu"});
        take(m, "lambda", cfg.lambda);
        take(m, "mu", cfg.mu);
        require_positive(cfg.mu, "mu");
        if (cfg.lambda < 0) throw InputError("config: lambda must be nonnegative");
    }
    if (doc.contains("options")) {
        const json& o = doc["options"];
        check_keys(o, "options",
                   {"h_values", "gammas", "eps", "seed", "starts", "max_iter",
                    "amplitude", "family", "profile", "profile_amplitude"});
        take(o, "h_values", cfg.h_values);
        take(o, "gammas", cfg.gammas);
        take(o, "eps", cfg.eps);
        take(o, "seed", cfg.seed);
        take(o, "starts", cfg.starts);
        take(o, "max_iter", cfg.max_iter);
        take(o, "amplitude", cfg.amplitude);
        take(o, "family", cfg.family);
        take(o, "profile", cfg.profile);
        take(o, "profile_amplitude", cfg.profile_amplitude);
        if (cfg.starts < 1 || cfg.max_iter < 1)
            throw InputError("config: starts and max_iter must be at least 1");
    }
    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        check_keys(t, "tolerances", {"tau_iso", "tau_grad"});
        take(t, "tau_iso", cfg.tau_iso);
        take(t, "tau_grad", cfg.tau_grad);
    }
    require_positive(cfg.tau_iso, "tau_iso");
    require_positive(cfg.tau_grad, "tau_grad");

    cfg.canonical = doc.dump();  // keys sorted by the object representation
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_hash(const RunConfig& cfg) {
    std::string data = cfg.canonical + "#" + std::to_string(cfg.seed);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

Grid2D config_grid(const RunConfig& cfg) {
    return Grid2D(cfg.x1min, cfg.x1max, cfg.x2min, cfg.x2max, cfg.grid_n,
                  cfg.grid_n);
}

Load build_load(const RunConfig& cfg) { return build_load(cfg, config_grid(cfg)); }

Load build_load(const RunConfig& cfg, const Grid2D& g) {
    VectorField2D f;
    if (cfg.load_id == "tilt") {
        f = sample_vector(g, 3, [](double x1, double) {
            return Eigen::Vector3d(0.0, 0.0, x1);
        });
    } else if (cfg.load_id == "runaway") {
        f = sample_vector(g, 3, [](double x1, double x2) {
            return Eigen::Vector3d(x1 + 100.0 * (x1 * x1 - 1.0 / 12.0), x2, 0.0);
        });
    } else if (cfg.load_id == "incompatible") {
        double k = cfg.load_k;
        f = sample_vector(g, 3, [k](double x1, double) {
            return Eigen::Vector3d(x1, 0.0, k * (x1 * x1 - 1.0 / 12.0));
        });
    } else if (cfg.load_id == "zero_moment") {
        f = sample_vector(g, 3, [](double x1, double) {
            return Eigen::Vector3d(x1 * x1 - 1.0 / 12.0, 0.0, 0.0);
        });
    } else if (cfg.load_id == "file") {
        f = read_field(cfg.load_file);
        if (f.dim() != 3) throw InputError("config: load file must have 3 columns");
    } else {
        throw InputError("config: unknown load id \"" + cfg.load_id + "\"");
    }
    f.values *= cfg.load_scale;
    return normalize_mean(f);
}

ScalarField2D build_profile(const RunConfig& cfg) {
    Grid2D g = config_grid(cfg);
    double a = cfg.profile_amplitude;
    if (cfg.profile == "flat") return ScalarField2D(g);
    if (cfg.profile == "sine")
        return sample(g, [a](double x1, double) { return a * std::sin(x1); });
    if (cfg.profile == "ridge") {
        ScalarField2D r = sigmoid_ridge(g, {1.0, 0.6}, 0.1);
        r.values *= a;
        return r;
    }
    if (cfg.profile == "bump")  // non-developable on purpose
        return sample(g, [a](double x1, double x2) {
            return a * (x1 * x1 + x2 * x2);
        });
    throw InputError("config: unknown profile \"" + cfg.profile + "\"");
}

}  // namespace platelab
