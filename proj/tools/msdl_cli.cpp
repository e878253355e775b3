#include "msdl/driver.hpp"
#include "msdl/error.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace msdl;

namespace {

enum Exit { kOk = 0, kConfig = 2, kCertificate = 3, kSolver = 4, kIo = 5 };

int exit_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::ConfigInvalid:
    case ErrorKind::InconsistentTarget:
        return kConfig;
    case ErrorKind::Io:
        return kIo;
    case ErrorKind::NoCertificate:
    case ErrorKind::StarViolated:
        return kCertificate;
    default:
        return kSolver;
    }
}

int exit_for(const RunReport& r) {
    if (r.ok) return kOk;
    bool solver = false;
    for (const auto& s : r.stages)
        for (const auto& p : s.points) solver = solver || !p.error.empty() || !p.B || !p.E || !p.A;
    return solver ? kSolver : kCertificate;
}

void print_summary(const RunReport& r) {
    for (const auto& s : r.stages) {
        std::cout << "stage " << s.j << ": Lambda " << s.Lambda << ", eps " << s.eps << ", conditions A=" << s.A
                  << " B=" << s.B << " C=" << s.C << " D=" << s.D << " E=" << s.E << '\n';
        for (std::size_t i = 0; i < s.diagnostics.size() && i < 5; ++i) std::cout << "  " << s.diagnostics[i] << '\n';
        if (s.diagnostics.size() > 5) std::cout << "  ... " << s.diagnostics.size() - 5 << " more\n";
    }
    std::cout << (r.ok ? "ok" : "FAILED") << (r.halted.empty() ? "" : " (halted: " + r.halted + ")") << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parametric deformation of conformal minimal annuli with certified boundary distance"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir = "out", log_level = "info";
    std::uint64_t seed = 0;
    int jobs = 0;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--seed", seed, "override the configured seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads for grid evaluation");
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

    auto* demo = app.add_subcommand("demo", "catenoid end to end with the default configuration");
    auto* deform = app.add_subcommand("deform", "one distance-increasing deformation");
    auto* flux = app.add_subcommand("flux", "flux prescription only");
    app.add_subcommand("run", "full staged recursion");
    auto* verify = app.add_subcommand("verify", "re-check a report against exported coefficients");
    std::string report_path, coeff_path;
    verify->add_option("--report", report_path, "report.json (default OUT/report.json)");
    verify->add_option("--coefficients", coeff_path, "coefficients.csv (default OUT/coefficients.csv)");
    auto* exp = app.add_subcommand("export", "write a mesh of one family member");
    int member = 0, n_r = 32, n_theta = 128;
    std::string mesh_path, preset_name;
    exp->add_option("--coefficients", coeff_path, "coefficients.csv; without it the configured preset is used");
    exp->add_option("--preset", preset_name, "catenoid, flat or catenoid4");
    exp->add_option("--member", member, "grid index d");
    exp->add_option("--nr", n_r, "radial samples");
    exp->add_option("--ntheta", n_theta, "angular samples");
    exp->add_option("--mesh", mesh_path, "mesh path (default OUT/mesh.obj)");

    CLI11_PARSE(app, argc, argv);

    auto logger = spdlog::stderr_color_mt("msdl");
    spdlog::set_default_logger(logger);
    if (const char* env = std::getenv("MSDL_LOG")) log_level = env;
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--jobs")) cfg.jobs = jobs;
        validate_config(cfg);

        if (*verify) {
            if (report_path.empty()) report_path = out_dir + "/report.json";
            if (coeff_path.empty()) coeff_path = out_dir + "/coefficients.csv";
            std::ifstream in(report_path);
            if (!in) throw Error(ErrorKind::Io, "cannot open '" + report_path + "'");
            auto rep = ojson::parse(in);
            auto rc = parse_config(rep.at("config"));
            auto res = verify_report(rep, load_coefficients(coeff_path, rc.L));
            int failed = 0;
            for (const auto& c : res.checks)
                if (!c.ok) {
                    ++failed;
                    std::cout << "FAIL " << c.name << ": " << c.value << " vs " << c.bound << '\n';
                }
            std::cout << res.checks.size() << " checks, " << failed << " failed\n";
            return res.ok ? kOk : kCertificate;
        }
        if (*exp) {
            WeierstrassData w;
            if (!coeff_path.empty()) {
                auto ms = load_coefficients(coeff_path, cfg.L);
                if (member < 0 || member >= static_cast<int>(ms.size()))
                    throw Error(ErrorKind::ConfigInvalid, "--member out of range");
                w = ms[member];
            } else {
                w = preset(preset_name.empty() ? cfg.preset : preset_name, cfg.L);
            }
            if (mesh_path.empty()) mesh_path = out_dir + "/mesh.obj";
            auto st = export_mesh(Immersion{w, cfg.x0, {}}, n_r, n_theta, mesh_path);
            std::cout << mesh_path << ": " << st.vertices << " vertices, " << st.faces << " faces"
                      << (st.sidecar ? ", sidecar " + mesh_path + ".csv" : "") << '\n';
            return kOk;
        }
        if (*deform) {
            cfg.run_flux = false;
            cfg.J = 1;
            cfg.eps.resize(1);
        }
        if (*flux) {
            if (!cfg.flux.enabled) throw Error(ErrorKind::ConfigInvalid, "flux: the configuration has flux.enabled = false");
            cfg.run_deform = false;
        }
        if (*demo && config_path.empty()) cfg.halt_on_failure = false;
        validate_config(cfg);
        auto rep = run_homotopy_principle(cfg);
        export_report(rep, out_dir);
        if (*demo && !rep.members.empty()) {
            int last = static_cast<int>(rep.members.size()) - 1;
            export_mesh(Immersion{rep.members[last], cfg.x0, {}}, 32, 128, out_dir + "/mesh.obj");
        }
        print_summary(rep);
        return exit_for(rep);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_for(e);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    }
}
