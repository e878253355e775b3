#pragma once

#include "msdl/domain.hpp"

#include <cstdint>
#include <vector>

namespace msdl {

// Concentric rings in the host annulus A. Ring i occupies the radial band
// [radii[i] - delta/2, radii[i] + delta/2] minus its gate, the sector of angular
// half-width beta around 0 (i even) or pi (i odd).
struct Labyrinth {
    AnnularDomain A;
    int N = 0;
    std::vector<double> radii;
    double delta = 0.0;
    double beta = 0.1;
    double lambda = 0.0;

    double gate_angle(int i) const;
};

struct StarCertificate {
    double lambda = 0.0;
    double threshold = 0.0;
    double analytic_bound = 0.0;
    double sampled_min = 0.0; // min length over sampled paths without a long Omega-subpath
    int trials = 0;
    int violations = 0;
    bool valid = false;
};

struct BuiltLabyrinth {
    Labyrinth lab;
    StarCertificate cert;
};

struct PathVerdict {
    double length = 0.0;
    double longest_omega_run = 0.0;
    bool long_omega_subpath = false;
    bool long_enough = false;
    bool ok() const { return long_omega_subpath || long_enough; }
};

BuiltLabyrinth build_labyrinth(const AnnularDomain& A, double threshold, double lambda, double beta);
// explicit geometry, for tests and custom layouts
Labyrinth make_labyrinth(const AnnularDomain& A, int N, double delta, double beta, double lambda);

double analytic_star_bound(const Labyrinth& lab);
bool membership(const Labyrinth& lab, cplx z);
PathVerdict check_path(const Labyrinth& lab, const std::vector<cplx>& polyline, double lambda, double threshold);
StarCertificate verify_star(const Labyrinth& lab, double lambda, double threshold, int trials, std::uint64_t seed);

// sample points inside Omega: per ring, n_r radii across the band and the in-Omega nodes of an
// equispaced n_theta circle; `grow` enlarges bands and shrinks gates by that fraction
struct RingSamples {
    double radius;
    std::vector<cplx> nodes;
};
std::vector<RingSamples> omega_samples(const Labyrinth& lab, int n_r, int n_theta, double grow = 0.0);

} // namespace msdl
