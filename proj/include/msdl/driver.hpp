#pragma once

#include "msdl/deform.hpp"
#include "msdl/domain.hpp"
#include "msdl/fluxctl.hpp"
#include "msdl/weierstrass.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace msdl {

using ojson = nlohmann::ordered_json;

struct FluxTargetSpec {
    bool enabled = false;
    std::vector<std::vector<double>> from; // [curve][component]; empty means the flux of the t = 0 member
    std::vector<std::vector<double>> to;
};

struct RunConfig {
    int schema_version = 1;
    AnnularDomain L{0.5, 2.0};
    AnnularDomain K0{0.7, 1.4};
    cplx x0 = 1.0;
    std::string preset = "catenoid";
    double family_amp = 0.0; // member (p,t) is the preset scaled by 1 + amp p_1 t
    int grid_dims = 1;
    int grid_n = 5;
    int grid_nt = 5;
    std::vector<int> Q{0};
    int J = 1;
    double Lambda_unit = 10.0;
    std::vector<double> eps{0.1}; // eps_j, j = 1..J
    FluxTargetSpec flux;
    double null_tol = 1e-10;
    double period_tol = 1e-9;
    double newton_tol = 1e-11;
    double flux_tol = 1e-6;
    int max_iter = 10;
    int oka_degree = 24;
    int bump_degree = 4;
    double tau = 0.01;
    double beta = 0.2;
    double lambda_frac = 0.6;
    double rho_frac = 0.9;
    double h_eps = 0.3;
    int star_trials = 1000;
    int estimate_nr = 64;
    int estimate_ntheta = 512;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool halt_on_failure = true;
    bool run_flux = true;   // flux step of each stage (when flux.enabled)
    bool run_deform = true; // distance step of each stage
};

RunConfig parse_config(const ojson& j);
RunConfig load_config(const std::string& path);
ojson config_to_json(const RunConfig& cfg);
// throws config-invalid naming the offending key
void validate_config(const RunConfig& cfg);

ParameterGrid make_grid(const RunConfig& cfg);
std::vector<WeierstrassData> make_family(const RunConfig& cfg, const ParameterGrid& grid);

struct PointReport {
    int d = 0;
    std::vector<double> p;
    double t = 0.0;
    bool fixpoint = false;
    bool gated = false;
    double weight = 0.0;
    double kappa = 0.0;
    int newton_iterations = 0;
    double newton_residual = 0.0;
    double period_residual = 0.0;
    double h_dev_K = 0.0;
    double h_min_Omega = 0.0;
    double sup_change_flux = 0.0;
    double sup_change_deform = 0.0;
    double conformality = 0.0;
    double real_period = 0.0;
    std::vector<double> flux; // first curve
    double flux_error = 0.0;  // against the stage target
    bool certified = false;
    double certified_bound = 0.0;
    double rho = 0.0, sigma = 0.0, lambda = 0.0, h_min = 0.0;
    std::string failed_clauses;
    double distance_estimate = 0.0; // NaN when not computed
    bool A = true, B = true, C = true, E = true;
    std::string error;
};

struct StageReport {
    int j = 0;
    double Lambda = 0.0;
    double eps = 0.0;
    double r_cut = 0.0;
    AnnularDomain K_prev, K;
    int cover_size = 0;
    double oka_residual = 0.0;
    double oka_budget = 0.0;
    double h_required = 0.0;
    double scale = 0.0;
    std::vector<PointReport> points;
    bool A = true, B = true, C = true, D = true, E = true;
    std::vector<std::string> diagnostics;
};

struct RunReport {
    ojson config;
    std::vector<StageReport> stages;
    bool ok = true;
    std::string halted; // first failing condition when halt_on_failure stopped the run
    std::vector<WeierstrassData> members; // final family, not serialized in the report
};

RunReport run_homotopy_principle(const RunConfig& cfg);

ojson report_to_json(const RunReport& r);
RunReport report_from_json(const ojson& j);

// deterministic text: 2-space indent, doubles as %.17g, non-finite as null
std::string dump_json(const ojson& j);
void write_text(const std::string& path, const std::string& text);
void export_report(const RunReport& r, const std::string& dir);
// "d,component,k,re,im" rows
void export_coefficients(const std::vector<WeierstrassData>& members, const std::string& path);
std::vector<WeierstrassData> load_coefficients(const std::string& path, const AnnularDomain& L);

struct MeshStats {
    int vertices = 0;
    int faces = 0;
    bool sidecar = false;
};
// "v x y z" then 1-based "f i j k"; all n coordinates go to path + ".csv" when n > 3
MeshStats export_mesh(const Immersion& im, int n_r, int n_theta, const std::string& path);

struct VerifyCheck {
    std::string name;
    bool ok = true;
    double value = 0.0;
    double bound = 0.0;
};
struct VerifyResult {
    std::vector<VerifyCheck> checks;
    bool ok = true;
};
// re-checks the last stage of a report against exported coefficients
VerifyResult verify_report(const ojson& report, const std::vector<WeierstrassData>& members);

} // namespace msdl
