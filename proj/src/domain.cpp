#include "msdl/domain.hpp"

#include "msdl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

namespace msdl {

AnnularDomain AnnularDomain::make(double r_in, double r_out) {
    if (!(r_in >= 0.0) || !(r_out > r_in) || !std::isfinite(r_out))
        throw Error(ErrorKind::InvalidGeometry,
                    "need 0 <= r_in < r_out, got " + std::to_string(r_in) + ", " + std::to_string(r_out));
    return {r_in, r_out};
}

double AnnularDomain::core_radius() const {
    return is_disc() ? 0.5 * r_out : std::sqrt(r_in * r_out);
}

bool AnnularDomain::contains_radius(double r, double rel_tol) const {
    return r >= r_in * (1.0 - rel_tol) && r <= r_out * (1.0 + rel_tol);
}

bool AnnularDomain::contains(cplx z, double rel_tol) const {
    return contains_radius(std::abs(z), rel_tol);
}

bool AnnularDomain::strictly_contains(const AnnularDomain& inner) const {
    bool in_ok = is_disc() ? true : inner.r_in > r_in;
    return in_ok && inner.r_out < r_out;
}

cplx Circle::at(double s) const {
    return std::polar(radius, 2.0 * std::numbers::pi * s);
}

HomologyBasis homology_basis(const AnnularDomain& K0) {
    HomologyBasis b;
    if (!K0.is_disc()) b.curves.push_back({K0.core_radius()});
    return b;
}

double ParameterGrid::distance(int d1, int d2) const {
    const auto& a = points[p_of(d1)];
    const auto& b = points[p_of(d2)];
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    double dt = t_values[t_of(d1)] - t_values[t_of(d2)];
    return std::sqrt(s + dt * dt);
}

bool ParameterGrid::is_fixpoint(int d) const {
    return t_of(d) == 0 || q_mask[p_of(d)];
}

void ParameterGrid::validate() const {
    if (points.empty() || t_values.empty())
        throw Error(ErrorKind::ConfigInvalid, "empty parameter grid");
    if (q_mask.size() != points.size())
        throw Error(ErrorKind::ConfigInvalid, "q_mask size mismatch");
    if (t_values.front() != 0.0)
        throw Error(ErrorKind::ConfigInvalid, "t grid must start at 0");
    for (std::size_t i = 1; i < t_values.size(); ++i)
        if (!(t_values[i] > t_values[i - 1]) || t_values[i] > 1.0)
            throw Error(ErrorKind::ConfigInvalid, "t grid must increase inside [0,1]");
    std::set<int> prev;
    for (const auto& T : T_chain) {
        std::set<int> cur(T.begin(), T.end());
        for (int p : cur) {
            if (p < 0 || static_cast<std::size_t>(p) >= points.size())
                throw Error(ErrorKind::ConfigInvalid, "T index out of range");
            if (q_mask[p]) throw Error(ErrorKind::ConfigInvalid, "Q point inside T_j");
        }
        if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()))
            throw Error(ErrorKind::ConfigInvalid, "T chain not nested");
        prev = cur;
    }
    if (!T_chain.empty()) {
        std::size_t nq = std::count(q_mask.begin(), q_mask.end(), false);
        if (prev.size() != nq) throw Error(ErrorKind::ConfigInvalid, "union of T_j must be P \\ Q");
    }
}

ParameterGrid uniform_grid(int dims, int n, int nt, const std::vector<int>& q_indices) {
    if (dims < 0 || n < 1 || nt < 1) throw Error(ErrorKind::ConfigInvalid, "bad grid sizes");
    ParameterGrid g;
    int total = 1;
    for (int i = 0; i < dims; ++i) total *= n;
    for (int k = 0; k < total; ++k) {
        std::vector<double> p(dims);
        int r = k;
        for (int i = 0; i < dims; ++i) {
            p[i] = n == 1 ? 0.0 : static_cast<double>(r % n) / (n - 1);
            r /= n;
        }
        g.points.push_back(std::move(p));
    }
    g.q_mask.assign(g.points.size(), false);
    for (int q : q_indices) {
        if (q < 0 || q >= total) throw Error(ErrorKind::ConfigInvalid, "Q index out of range");
        g.q_mask[q] = true;
    }
    for (int i = 0; i < nt; ++i) g.t_values.push_back(nt == 1 ? 0.0 : static_cast<double>(i) / (nt - 1));
    std::vector<int> T;
    for (int k = 0; k < total; ++k)
        if (!g.q_mask[k]) T.push_back(k);
    g.T_chain.push_back(T);
    return g;
}

Exhaustion build_exhaustion(const AnnularDomain& K0, const AnnularDomain& L, int stages) {
    if (stages < 1) throw Error(ErrorKind::InvalidGeometry, "stages must be >= 1");
    if (!L.strictly_contains(K0)) throw Error(ErrorKind::InvalidGeometry, "K0 not strictly inside L");
    if (K0.is_disc() != L.is_disc()) throw Error(ErrorKind::InvalidGeometry, "mixed disc/annulus exhaustion");
    Exhaustion ex;
    for (int j = 0; j <= stages; ++j) {
        double s = static_cast<double>(j) / stages;
        double rin = K0.is_disc() ? 0.0 : std::pow(K0.r_in, 1.0 - s) * std::pow(L.r_in, s);
        double rout = std::pow(K0.r_out, 1.0 - s) * std::pow(L.r_out, s);
        if (j == 0) { rin = K0.r_in; rout = K0.r_out; }
        if (j == stages) { rin = L.r_in; rout = L.r_out; }
        ex.stages.push_back({rin, rout});
    }
    ex.base_point = cplx(K0.core_radius(), 0.0);
    return ex;
}

std::vector<double> urysohn_weights(const ParameterGrid& grid, const std::vector<int>& Y,
                                    const std::vector<int>& Z) {
    std::set<int> ys(Y.begin(), Y.end());
    for (int z : Z)
        if (ys.count(z)) throw Error(ErrorKind::Disjointness, "Y and Z share grid point " + std::to_string(z));
    const int n = static_cast<int>(grid.size());
    std::vector<double> phi(n, 0.0);
    std::set<int> zs(Z.begin(), Z.end());
    for (int d = 0; d < n; ++d) {
        if (ys.count(d)) { phi[d] = 0.0; continue; }
        if (zs.count(d)) { phi[d] = 1.0; continue; }
        double dy = std::numeric_limits<double>::infinity(), dz = dy;
        for (int y : Y) dy = std::min(dy, grid.distance(d, y));
        for (int z : Z) dz = std::min(dz, grid.distance(d, z));
        if (Y.empty() && Z.empty()) phi[d] = 0.0;
        else if (Y.empty()) phi[d] = 1.0;
        else if (Z.empty()) phi[d] = 0.0;
        else phi[d] = dy / (dy + dz);
    }
    return phi;
}

std::vector<cplx> sample_circle(double r, int N, double phase) {
    std::vector<cplx> z(N);
    for (int k = 0; k < N; ++k) z[k] = std::polar(r, 2.0 * std::numbers::pi * (k + phase) / N);
    return z;
}

std::vector<cplx> sample_circle(const AnnularDomain& dom, double r, int N) {
    if (N < 4) throw Error(ErrorKind::Undersampled, "need at least 4 nodes, got " + std::to_string(N));
    if (!dom.contains_radius(r)) throw Error(ErrorKind::OutOfDomain, "circle radius " + std::to_string(r));
    auto z = sample_circle(r, N);
    // exact roots of unity for the quarter points
    for (int k = 0; k < N; ++k) {
        if ((4 * k) % N == 0) {
            int q = 4 * k / N;
            const cplx units[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            z[k] = r * units[q];
        }
    }
    return z;
}

} // namespace msdl
