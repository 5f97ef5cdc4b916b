#include "platelab/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace platelab {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

json skew_json(const SkewMatrix& w) {
    return json{{"w12", w.w12}, {"w13", w.w13}, {"w23", w.w23}};
}

json header(const RunConfig& cfg, const char* command) {
    json h;
    h["command"] = command;
    h["config_hash"] = config_hash(cfg);
    h["seed"] = cfg.seed;
    h["version"] = "1.0.0";
    h["tolerances"] = {{"tau_iso", cfg.tau_iso}, {"tau_grad", cfg.tau_grad}};
    return h;
}

json set_json(const OptimalRotationSet& set) {
    json s;
    s["representative"] = matrix_json(set.representative);
    s["dim"] = set.dim;
    s["max_value"] = set.max_value;
    if (set.generator) s["generator"] = skew_json(*set.generator);
    return s;
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

void write_field(const std::string& path, const Grid2D& g,
                 const Eigen::MatrixXd& values) {
    if (values.rows() != g.size())
        throw InputError("write_field: values do not match the grid");
    std::ostringstream out;
    out << "# field " << g.n1 << " " << g.n2 << " " << fmt17(g.x1min) << " "
        << fmt17(g.x1max) << " " << fmt17(g.x2min) << " " << fmt17(g.x2max)
        << " " << values.cols() << "\n";
    for (int n = 0; n < values.rows(); ++n) {
        for (int c = 0; c < values.cols(); ++c)
            out << (c ? " " : "") << fmt17(values(n, c));
        out << "\n";
    }
    write_text(path, out.str());
}

VectorField2D read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open field file " + path);
    std::string tag, kind;
    int n1 = 0, n2 = 0, cols = 0;
    double a1, b1, a2, b2;
    if (!(in >> tag >> kind >> n1 >> n2 >> a1 >> b1 >> a2 >> b2 >> cols) ||
        tag != "#" || kind != "field")
        throw InputError("field file " + path + ": bad header");
    if (n1 < 3 || n2 < 3 || cols < 1)
        throw InputError("field file " + path + ": bad dimensions");
    Grid2D g(a1, b1, a2, b2, n1, n2);
    VectorField2D f(g, cols);
    for (int n = 0; n < g.size(); ++n)
        for (int c = 0; c < cols; ++c)
            if (!(in >> f.values(n, c)))
                throw InputError("field file " + path + ": truncated data");
    return f;
}

nlohmann::json cmd_analyze_load(const RunConfig& cfg) {
    Load load = build_load(cfg);
    MomentMatrix mm = moment_matrix(load);
    OptimalRotationSet set = classify_optimal_set(load, mm);
    json rep = header(cfg, "analyze-load");
    rep["moment_matrix"] = matrix_json(mm.M);
    rep["optimal_set"] = set_json(set);
    Coefficients co = coefficients(load, set.representative);
    rep["coefficients"] = {
        {"a", co.a}, {"b", co.b}, {"c", co.c}, {"c_residual", co.c_residual}};
    double cres = compatibility_residual(load, set.representative);
    rep["compatibility_residual"] = cres;
    rep["compatibility_ok"] = cres <= load.tolerance_scale();
    rep["compatibility_tolerance"] = load.tolerance_scale();
    json tb = json::array(), nb = json::array();
    for (const SkewMatrix& w : tangent_space(set, set.representative))
        tb.push_back(skew_json(w));
    for (const SkewMatrix& w : normal_space(set, set.representative))
        nb.push_back(skew_json(w));
    rep["tangent_basis"] = tb;
    rep["normal_basis"] = nb;
    return rep;
}

nlohmann::json cmd_stability(const RunConfig& cfg) {
    Load load = build_load(cfg);
    ElasticModel m(cfg.lambda, cfg.mu);
    StabilityReport r = stability_report(load, m, cfg.seed);
    json rep = header(cfg, "stability");
    rep["dim"] = r.dim;
    rep["compatibility_ok"] = r.compatibility_ok;
    rep["compatibility_residual_max"] = r.compatibility_residual_max;
    rep["s2_affine_holds"] = r.s2_affine.holds;
    rep["s2_affine_min"] = r.s2_affine.min_value;
    rep["s2_affine_witness"] = skew_json(r.s2_affine.witness);
    rep["s2_probe_min"] = r.s2_probe_min;
    rep["s2_probe_witness"] = skew_json(r.s2_probe_witness);
    rep["s1_min"] = r.s1.min_value;
    rep["s1_flat_floor"] = r.s1.flat_floor;
    rep["s1_failure"] = r.s1.failure;
    rep["s1_witness"] = r.s1.witness;
    rep["divergence_slopes"] = r.divergence_slopes;
    if (r.special_regime)
        rep["verdict"] = "special-regime";  // load functional vanishes
    else if (!r.compatibility_ok)
        rep["verdict"] = "kirchhoff-regime";  // surface stability fails
    else if (r.s2_affine.holds)
        rep["verdict"] = "affine-stable";
    else
        rep["verdict"] = "affine-certificate-violated";
    return rep;
}

nlohmann::json cmd_minimize(const RunConfig& cfg, const std::string& out_dir) {
    Load load = build_load(cfg);
    ElasticModel m(cfg.lambda, cfg.mu);
    OptimalRotationSet set = classify_optimal_set(load, moment_matrix(load));
    MinimizeOptions opt;
    opt.starts = cfg.starts;
    opt.max_iter = cfg.max_iter;
    opt.seed = cfg.seed;
    opt.amplitude = cfg.amplitude;
    opt.tau_grad = cfg.tau_grad;
    MinimizeResult r = minimize_total_vk(load, set, m, opt);
    json rep = header(cfg, "minimize");
    rep["value"] = r.value;
    rep["converged"] = r.converged;
    rep["iterations"] = r.iterations;
    rep["grad_norm"] = r.grad_norm;
    rep["start_values"] = r.start_values;
    rep["energy_trace"] = r.trace;
    rep["verdict"] = r.unbounded ? "unbounded-below" : "minimizer-found";
    rep["rotation"] = matrix_json(r.quad.R);
    rep["spin"] = skew_json(r.quad.W);
    write_field(out_dir + "/u.txt", r.quad.u.grid, r.quad.u.values);
    write_field(out_dir + "/v.txt", r.quad.v.grid, r.quad.v.values);
    rep["fields"] = {{"u", "u.txt"}, {"v", "v.txt"}};
    return rep;
}

nlohmann::json cmd_scaling(const RunConfig& cfg, const std::string& out_dir) {
    ElasticModel m(cfg.lambda, cfg.mu);
    double tau_iso = cfg.tau_iso;
    auto vk_def = [&](double h, int n) {
        Grid2D g = Grid2D::unit_square(n);
        ScalarField2D v = sample(g, [](double x1, double) { return std::sin(x1); });
        return test_deformation_vk(Eigen::Matrix3d::Identity(), v, h);
    };
    auto kl_def = [&](double h, int n, double amp) {
        Grid2D g = Grid2D::unit_square(n);
        IsometricEmbedding emb = isometric_embedding(sample(g, [&](double x1, double) {
            return amp * std::sin(x1);
        }));
        return test_deformation_kl(Eigen::Matrix3d::Identity(), emb.y, h, 9, tau_iso);
    };
    auto deformation = [&](double h, int n) {
        if (cfg.family == "vk") return vk_def(h, n);
        if (cfg.family == "kl") return kl_def(h, n, 0.2);
        if (cfg.family == "kl_sqrt") return kl_def(h, n, std::sqrt(h));
        if (cfg.family == "rigid") {
            ScalarField2D v0(Grid2D::unit_square(n));
            return test_deformation_vk(Eigen::Matrix3d::Identity(), v0, h);
        }
        throw InputError("config: unknown scaling family \"" + cfg.family + "\"");
    };
    auto energy = [&](double h, int n) { return energy_h3d(deformation(h, n), h, m); };

    json rep = header(cfg, "scaling");
    rep["family"] = cfg.family;
    int grid_n = 65;
    bool degenerate = false;
    try {
        ScalingStudy s = scaling_study(energy, cfg.h_values);
        rep["slope"] = s.slope;
        rep["intercept"] = s.intercept;
        rep["fit_residual"] = s.residual;
        grid_n = s.grid_n;
    } catch (const DegenerateFitError& e) {
        degenerate = true;
        rep["degenerate_reason"] = e.what();
    }
    rep["degenerate"] = degenerate;
    rep["grid_n"] = grid_n;

    std::ostringstream csv;
    csv << "h,E_h,J_h\n";
    Load load = build_load(cfg, Grid2D::unit_square(grid_n));
    for (double h : cfg.h_values) {
        Field3D y = deformation(h, grid_n);
        csv << fmt17(h) << "," << fmt17(energy_h3d(y, h, m)) << ","
            << fmt17(total_h3d(y, h, load, m)) << "\n";
    }
    write_text(out_dir + "/scaling.csv", csv.str());
    rep["series"] = "scaling.csv";
    return rep;
}

nlohmann::json cmd_embed(const RunConfig& cfg, const std::string& out_dir) {
    ScalarField2D v = build_profile(cfg);
    IsometricEmbedding emb = isometric_embedding(v);
    json rep = header(cfg, "embed");
    rep["profile"] = cfg.profile;
    rep["residual"] = emb.residual;
    rep["grad_sup"] = emb.grad_sup;
    rep["u_sup"] = emb.u_sup;
    rep["estimate_bound"] = emb.estimate_bound;
    write_field(out_dir + "/y.txt", emb.y.grid, emb.y.values);
    write_field(out_dir + "/u.txt", emb.u.grid, emb.u.values);

    // per-node isometry defect map
    const Grid2D& g = emb.y.grid;
    Eigen::MatrixXd t1(g.size(), 3), t2(g.size(), 3);
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd d;
        apply_d1(g, emb.y.values.col(c), d);
        t1.col(c) = d;
        apply_d2(g, emb.y.values.col(c), d);
        t2.col(c) = d;
    }
    Eigen::MatrixXd defect(g.size(), 1);
    for (int n = 0; n < g.size(); ++n) {
        Eigen::Vector3d a = t1.row(n), b = t2.row(n);
        defect(n, 0) = std::max({std::abs(a.dot(a) - 1.0), std::abs(b.dot(b) - 1.0),
                                 std::abs(a.dot(b))});
    }
    write_field(out_dir + "/residual_map.txt", g, defect);
    rep["fields"] = {{"y", "y.txt"}, {"u", "u.txt"}, {"residual_map", "residual_map.txt"}};
    return rep;
}

}  // namespace platelab
