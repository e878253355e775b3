#pragma once

#include "msdl/domain.hpp"
#include "msdl/spray.hpp"
#include "msdl/weierstrass.hpp"

#include <string>
#include <utility>
#include <vector>

namespace msdl {

// target flux per grid point, indexed like the grid
struct FluxHomotopy {
    std::vector<FluxClass> per_point;
};

// F_p^t = (1 - t) F0 + t F1 on every p
FluxHomotopy linear_flux_target(const ParameterGrid& grid, const FluxClass& F0, const FluxClass& F1);
// the family's own flux, i.e. the identity target
FluxHomotopy current_flux(const std::vector<WeierstrassData>& family, const HomologyBasis& C);

struct FluxConfig {
    AnnularDomain K;
    cplx x0 = 1.0;
    double eps = 0.1;
    double period_tol = 1e-9;   // real periods and the fixpoint consistency check
    double flux_tol = 1e-6;
    double newton_tol = 1e-11;
    int max_iter = 80;          // over all continuation substeps
    int substeps = 8;
    double tau = 0.01;
    int bump_degree = 4;
    double independence_tol = 1e-3;
    int k_start = 4;            // basis points per curve: 2 k_start, doubled on a degenerate choice
    int k_max = 8;
    int max_sweeps = 6;
    int max_steps = 40;         // continuation steps along the target path
    double continuity_jump = 0.5;
    int jobs = 1;
};

struct FluxPointRecord {
    int d = 0;
    bool touched = false;
    int steps = 0;
    int sweeps = 0;
    int newton_iterations = 0;
    std::vector<double> achieved; // flux per component on the first curve
    double flux_error = 0.0;      // inf-norm over curves and components
    double real_period = 0.0;
    double sup_change_K = 0.0;
    double conformality = 0.0;
    std::string error;
};

struct FluxResult {
    std::vector<WeierstrassData> members;
    std::vector<FluxPointRecord> points;
    std::vector<std::string> warnings;
    bool ok = true;
};

// (0,1), (2,3), ..., and (n-1, 0) closing the cycle when n is odd
std::vector<std::pair<int, int>> flux_pairs(int n);

// fixpoint consistency (throws inconsistent-target) and the t-continuity surrogate (returns warnings)
std::vector<std::string> validate_flux_target(const ParameterGrid& grid, const std::vector<WeierstrassData>& family,
                                              const FluxHomotopy& target, const HomologyBasis& C, double tol,
                                              double jump);

// composed Lopez-Ros sprays over flux_pairs until the periods are (i F); throws flux-unreachable
WeierstrassData prescribe_flux_point(const WeierstrassData& w, const FluxClass& target, const HomologyBasis& C,
                                     const FluxConfig& cfg, FluxPointRecord& rec);

FluxResult prescribe_flux(const ParameterGrid& grid, const std::vector<WeierstrassData>& family,
                          const FluxHomotopy& target, const FluxConfig& cfg);

} // namespace msdl
