#include <chrono>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "platelab/report.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"plate load analysis and stability probes"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    bool verbose = false;
    long long seed_override = -1;
    app.add_option("--config", config_path, "path to the JSON run configuration")
        ->required();
    app.add_option("--out", out_dir, "output directory for reports and dumps");
    app.add_option("--seed", seed_override, "override the configured seed");
    app.add_flag("--verbose", verbose, "print progress to stderr");

    CLI::App* sub_analyze = app.add_subcommand("analyze-load", "moment matrix, optimal set, coefficients");
    CLI::App* sub_stab = app.add_subcommand("stability", "affine certificate and probe battery");
    CLI::App* sub_min = app.add_subcommand("minimize", "joint minimization of the plate functional");
    CLI::App* sub_scal = app.add_subcommand("scaling", "thickness sweep and slope fit");
    CLI::App* sub_embed = app.add_subcommand("embed", "isometric surface construction");
    for (CLI::App* s : {sub_analyze, sub_stab, sub_min, sub_scal, sub_embed})
        s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors map to exit 1
    }

    if (const char* threads = std::getenv("PLATELAB_THREADS"))
        Eigen::setNbThreads(std::max(1, std::atoi(threads)));

    platelab::RunConfig cfg = platelab::load_config_file(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

    auto t0 = std::chrono::steady_clock::now();
    nlohmann::json rep;
    if (*sub_analyze)
        rep = platelab::cmd_analyze_load(cfg);
    else if (*sub_stab)
        rep = platelab::cmd_stability(cfg);
    else if (*sub_min)
        rep = platelab::cmd_minimize(cfg, out_dir);
    else if (*sub_scal)
        rep = platelab::cmd_scaling(cfg, out_dir);
    else if (*sub_embed)
        rep = platelab::cmd_embed(cfg, out_dir);

    std::string name = app.get_subcommands().front()->get_name();
    platelab::write_text(out_dir + "/report.json", rep.dump(2) + "\n");
    if (verbose) {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        std::cerr << name << ": " << ms << " ms, report " << out_dir
                  << "/report.json\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const platelab::InconsistencyError& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return 2;
    } catch (const platelab::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const platelab::NotDevelopableError& e) {
        std::cerr << "error: " << e.what() << " (residual " << e.residual << ")\n";
        return 1;
    } catch (const platelab::NotAnIsometryError& e) {
        std::cerr << "error: " << e.what() << " (residual " << e.residual << ")\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
