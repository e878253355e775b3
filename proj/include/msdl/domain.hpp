#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace msdl {

using cplx = std::complex<double>;

// Closed annulus r_in <= |z| <= r_out around 0; r_in == 0 is a disc. theta = dz.
struct AnnularDomain {
    double r_in = 0.0;
    double r_out = 1.0;

    static AnnularDomain make(double r_in, double r_out);

    bool is_disc() const { return r_in == 0.0; }
    double width() const { return r_out - r_in; }
    double core_radius() const;
    bool contains(cplx z, double rel_tol = 1e-12) const;
    bool contains_radius(double r, double rel_tol = 1e-12) const;
    // strict containment of the closure of `inner` in the interior of *this
    bool strictly_contains(const AnnularDomain& inner) const;
};

struct Exhaustion {
    std::vector<AnnularDomain> stages;
    cplx base_point;
};

struct Circle {
    double radius = 1.0;
    cplx at(double s) const; // s in [0,1)
};

struct HomologyBasis {
    std::vector<Circle> curves;
    std::size_t size() const { return curves.size(); }
};

HomologyBasis homology_basis(const AnnularDomain& K0);

// Grid points d = (p, t) are flattened as d = p_index * t_count + t_index.
struct ParameterGrid {
    std::vector<std::vector<double>> points;
    std::vector<bool> q_mask;
    std::vector<double> t_values;
    std::vector<std::vector<int>> T_chain; // nested sets of p indices

    std::size_t p_count() const { return points.size(); }
    std::size_t t_count() const { return t_values.size(); }
    std::size_t size() const { return p_count() * t_count(); }
    int flat(std::size_t p, std::size_t t) const { return static_cast<int>(p * t_count() + t); }
    std::size_t p_of(int d) const { return static_cast<std::size_t>(d) / t_count(); }
    std::size_t t_of(int d) const { return static_cast<std::size_t>(d) % t_count(); }
    double distance(int d1, int d2) const;
    // (P x {0}) u (Q x [0,1])
    bool is_fixpoint(int d) const;
    void validate() const;
};

// Uniform grid on [0,1]^dims with n points per axis and uniform t grid with nt points.
// T_chain defaults to a single set P \ Q.
ParameterGrid uniform_grid(int dims, int n, int nt, const std::vector<int>& q_indices);

Exhaustion build_exhaustion(const AnnularDomain& K0, const AnnularDomain& L, int stages);

std::vector<double> urysohn_weights(const ParameterGrid& grid, const std::vector<int>& Y,
                                    const std::vector<int>& Z);

std::vector<cplx> sample_circle(const AnnularDomain& dom, double r, int N);
std::vector<cplx> sample_circle(double r, int N, double phase = 0.0);

} // namespace msdl
