#pragma once

#include "msdl/domain.hpp"
#include "msdl/funspace.hpp"
#include "msdl/labyrinth.hpp"
#include "msdl/spray.hpp"
#include "msdl/weierstrass.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace msdl {

struct LopezRosOptions {
    bool require_exact = true;
    double period_tol = 1e-9;
    double recip_tol = 1e-13;
    const Laurent* reciprocal = nullptr; // 1/h when known in closed form
};

struct LopezRosResult {
    WeierstrassData data;
    double period_residual = 0.0; // max over curves of |int (f - fh)| and |int (g - g/h)|
};

// phi_a, phi_b -> (fh + g/h)/2, (i/2)(fh - g/h); h == 1 returns the input unchanged
LopezRosResult lopez_ros(const WeierstrassData& w, const Laurent& h, int a, int b, const LopezRosOptions& opt = {});
WeierstrassData lopez_ros_step(const WeierstrassData& w, const Laurent& h, int a, int b,
                               const LopezRosOptions& opt = {});

// One host annulus with its labyrinth and the sampled clauses of the crossing dichotomy.
struct AnnulusCertificate {
    AnnularDomain A;
    Labyrinth lab;
    double rho = 0.0;        // claimed lower bound of |Psi| on A
    double sigma = 0.0;      // claimed lower bound of |f| on Omega
    double lambda = 0.0;
    double threshold = 0.0;  // (star) threshold 2 sqrt(2) Lambda / sqrt(rho)
    double h_required = 0.0; // sqrt(2) 2 Lambda / (lambda sigma)
    double h_min = 0.0;      // sampled min |h| on Omega
    double psi_min = 0.0;    // sampled min |Psi| on A
    double f_min = 0.0;      // sampled min |f| on Omega
    StarCertificate star;
    double bound = 0.0;      // min(T sqrt(rho/2), lambda sigma h_min / 2)
    std::vector<Clause> clauses;
    bool valid = false;
};

struct DeformationCertificate {
    double Lambda = 0.0;
    double rho = 0.0;
    double sigma = 0.0;
    double lambda = 0.0;
    double eps0 = 0.0;
    double h_min_on_Omega = 0.0;
    StarCertificate star;
    double certified_bound = 0.0;
    std::vector<AnnulusCertificate> annuli;
    bool valid = false;
    std::string failed() const;
};

// Samples every clause on A and Omega and returns the dichotomy bound; throws no-certificate
// naming the failing clause unless throw_on_failure is false.
double certify_boundary_distance(const WeierstrassData& wt, int a, int b, const Laurent& f, const Laurent& h,
                                 AnnulusCertificate& cert, int star_trials, std::uint64_t seed,
                                 bool throw_on_failure = true);

// Dijkstra on the polar 8-neighbour graph of L weighted by midpoint induced speed
double estimate_distance(const Immersion& im, int n_r, int n_theta);

// sup |u_new - u_old| over an n_r x n_theta polar sample of K, both immersions based at x0
double sup_change_on(const WeierstrassData& w_old, const WeierstrassData& w_new, const AnnularDomain& K, cplx x0,
                     int n_r = 10, int n_theta = 50);

struct DeformConfig {
    AnnularDomain K;
    cplx x0 = 1.0;
    double Lambda = 10.0;
    double eps = 0.1;      // sup-change budget on K
    double r_cut = 0.5;    // certificates on T x [r_cut, 1]
    std::vector<int> T;    // p indices; empty means P \ Q
    double h_eps = 0.3;    // Lemma 2.2 clause budget for |h - 1| on K and |h| on Omega
    double beta = 0.2;     // gate half-width
    double lambda_frac = 0.6;
    double rho_frac = 0.9;
    double host_margin = 0.05; // fraction of each gap kept free next to K and bL
    int oka_degree = 24;
    double oka_ridge = 1e-8;
    int bump_degree = 4;
    double tau = 0.01;
    int k_max = 4;
    double newton_tol = 1e-11;
    int max_iter = 10;
    double period_tol = 1e-9;
    int star_trials = 1000;
    std::uint64_t seed = 1;
    int jobs = 1;
};

struct PointRecord {
    int d = 0;
    double weight = 0.0;
    bool gated = false;
    bool touched = false;
    double kappa = 0.0;
    int newton_iterations = 0;
    double newton_residual = 0.0;
    double period_residual = 0.0;
    double sup_change_K = 0.0;
    double h_dev_K = 0.0;
    double h_min_Omega = 0.0;
    double conformality = 0.0;
    double flux_change = 0.0;
    std::vector<Clause> h_clauses;
    DeformationCertificate cert;
    bool certified = false;
    std::string error;
};

struct StageRecord {
    int l = 0;
    int a = 0, b = 0;
    std::vector<int> members;
    std::vector<AnnularDomain> hosts;
    std::vector<Labyrinth> labs;
    std::vector<StarCertificate> stars;
    double rho = 0.0, sigma = 0.0, lambda = 0.0, h_required = 0.0;
    double mu = 0.0;
    OkaFit oka;
    double oka_budget = 0.0;
    double scale = 0.0; // bisected amplitude factor s
    double eps0 = 0.0;  // achieved sup |h - 1| on K at full weight
    std::vector<double> jacobian_singular_values;
    std::vector<PointRecord> points;
};

struct DeformResult {
    std::vector<WeierstrassData> members;
    std::vector<StageRecord> stages;
    std::vector<PointRecord> points; // final per grid point summary
    bool ok = true;                  // every gated point certified and every budget met
};

DeformResult increase_distance(const ParameterGrid& grid, const std::vector<WeierstrassData>& family,
                               const DeformConfig& cfg);

} // namespace msdl
