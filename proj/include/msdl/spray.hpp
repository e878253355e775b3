#pragma once

#include "msdl/domain.hpp"
#include "msdl/funspace.hpp"
#include "msdl/labyrinth.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace msdl {

// Product is v = prod (1 + zeta_j a_j); Exponential is v = exp(sum zeta_j a_j), used where
// large corrections must stay nowhere vanishing on L.
enum class SprayForm { Product, Exponential };

struct BasisPoints {
    std::vector<double> s; // curve parameters, 2k per curve
    std::vector<int> curve;
    int k = 1;
    double margin = 0.0; // min over grid points of the best relative |det|
};

struct BumpFamily {
    HomologyBasis C;
    std::vector<double> s;
    std::vector<int> curve;
    std::vector<cplx> y;
    double tau = 0.01;
    int degree = 4;
    std::vector<Laurent> a;
    std::vector<double> residual;  // sup |a - normalized bump| on the curve
    std::vector<double> leakage;   // sup |a| on the curve outside the tau-arc
};

struct Spray {
    BumpFamily bumps;
    SprayForm form = SprayForm::Product;
    double ball_radius = 0.0; // max-norm bound on zeta
    std::vector<cplx> zeta;
};

struct PeriodTarget {
    std::vector<std::array<cplx, 2>> per_curve; // (int f h dz, int g/h dz)
    double distance(const PeriodTarget& o) const;
};

struct OkaFit {
    Laurent H1;
    double residual_K = 0.0;
    double residual_Omega = 0.0;
    double residual = 0.0;
    int degree = 0;
};

struct OkaResult {
    Laurent h;
    OkaFit fit;
    double amplitude = 0.0; // phi_d * log(1 + 1/mu)
    double budget = 0.0;
    bool budget_ok = false;
};

struct SolveResult {
    std::vector<cplx> zeta;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> trace;
};

struct Clause {
    std::string name;
    bool ok = true;
    double value = 0.0;
    double bound = 0.0;
};

struct AssembleChecks {
    const Laurent* f = nullptr;
    const Laurent* g = nullptr;
    HomologyBasis C;
    AnnularDomain K;
    std::vector<Labyrinth> labs;
    double eps = 0.3;
    double period_tol = 1e-9;
    bool identity_expected = false;
};

struct AssembleResult {
    Laurent h;
    std::vector<Clause> clauses;
    bool ok = true;
    std::string failed() const;
};

BasisPoints select_basis_points(const std::vector<Laurent>& f, const std::vector<Laurent>& g, const HomologyBasis& C,
                                int k, double margin = 1e-3);
BasisPoints select_basis_points(const std::vector<Laurent>& f, const std::vector<Laurent>& g, const HomologyBasis& C,
                                const std::vector<double>& s, double margin = 1e-3);
BumpFamily build_bumps(const HomologyBasis& C, const BasisPoints& points, double tau, int degree,
                       double residual_cap = 1.0);
Spray make_spray(BumpFamily bumps, SprayForm form, const AnnularDomain& L);

// v_zeta as a Laurent series (Exponential form is expanded to tol)
Laurent spray_function(const Spray& spray, const std::vector<cplx>& zeta, double tol = 1e-14);

PeriodTarget period_map(const Laurent& h, const Laurent& f, const Laurent& g, const HomologyBasis& C);
// target for h = 1
PeriodTarget period_map_identity(const Laurent& f, const Laurent& g, const HomologyBasis& C);

struct JacobianResult {
    Eigen::MatrixXcd J;      // exact quadrature columns
    Eigen::MatrixXcd approx; // (f(y), -g(y)) point approximation
    std::vector<double> singular_values;
};
JacobianResult period_jacobian(const Spray& spray, const Laurent& f, const Laurent& g, const HomologyBasis& C);

OkaFit fit_oka_log_target(const AnnularDomain& K, const std::vector<Labyrinth>& labs, const AnnularDomain& L,
                          int degree, double ridge = 1e-8);
Laurent oka_from_fit(const OkaFit& fit, double amplitude);
double oka_budget(double mu);
OkaResult build_oka_function(const AnnularDomain& K, const std::vector<Labyrinth>& labs, const AnnularDomain& L,
                             double mu, double phi_d, int degree, bool strict = true);

SolveResult solve_periods(const Laurent& w, const Spray& spray, const Laurent& f, const Laurent& g,
                          const HomologyBasis& C, const PeriodTarget& target, double tol, int max_iter,
                          int substeps = 1);

AssembleResult assemble_h(const Laurent& oka, const Spray& spray, const std::vector<cplx>& zeta,
                          const AssembleChecks& checks, bool throw_on_failure = true);

// sampled sup |h - 1| on K and min |h| on Omega
double sup_deviation_on(const Laurent& h, const AnnularDomain& K, int n_r = 8, int n_theta = 256);
double min_modulus_on(const Laurent& h, const std::vector<Labyrinth>& labs, int n_r = 3, int n_theta = 512);
double min_modulus_on(const Laurent& f, const AnnularDomain& A, int n_r = 8, int n_theta = 512);
bool nowhere_vanishing(const Laurent& h);

} // namespace msdl
