#include "msdl/labyrinth.hpp"

#include "msdl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace msdl {

namespace {

constexpr double kPi = std::numbers::pi;

double angle_dist(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2.0 * kPi);
    return std::min(d, 2.0 * kPi - d);
}

// polyline through polar waypoints (r, theta), linear in (r, theta), chopped into short chords
void append_polar(std::vector<cplx>& path, double r0, double t0, double r1, double t1, double step) {
    double len = std::abs(r1 - r0) + std::max(r0, r1) * std::abs(t1 - t0);
    int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = path.empty() ? 0 : 1; k <= n; ++k) {
        double s = static_cast<double>(k) / n;
        path.push_back(std::polar(r0 + (r1 - r0) * s, t0 + (t1 - t0) * s));
    }
}

} // namespace

double Labyrinth::gate_angle(int i) const { return (i % 2 == 0) ? 0.0 : kPi; }

Labyrinth make_labyrinth(const AnnularDomain& A, int N, double delta, double beta, double lambda) {
    if (N < 1) throw Error(ErrorKind::InfeasibleLabyrinth, "need at least one ring");
    if (!(beta > 0.0 && beta < kPi / 4)) throw Error(ErrorKind::InfeasibleLabyrinth, "gate half-width must lie in (0, pi/4)");
    const double slot = A.width() / (2 * N + 1);
    if (!(delta > 0.0 && delta <= slot))
        throw Error(ErrorKind::InfeasibleLabyrinth, "ring thickness does not fit its slot");
    Labyrinth lab;
    lab.A = A;
    lab.N = N;
    lab.delta = delta;
    lab.beta = beta;
    lab.lambda = lambda;
    for (int i = 0; i < N; ++i) lab.radii.push_back(A.r_in + (2 * i + 1.5) * slot);
    return lab;
}

double analytic_star_bound(const Labyrinth& lab) {
    return (lab.N - 1) * (kPi - 2.0 * lab.beta) * lab.A.r_in;
}

BuiltLabyrinth build_labyrinth(const AnnularDomain& A, double threshold, double lambda, double beta) {
    if (!(beta > 0.0 && beta < kPi / 4)) throw Error(ErrorKind::InfeasibleLabyrinth, "beta must lie in (0, pi/4)");
    if (!(A.width() > 0.0) || !(A.r_in > 0.0)) throw Error(ErrorKind::InfeasibleLabyrinth, "host annulus has no width");
    int N = 1;
    if (threshold > 0.0) N = 1 + static_cast<int>(std::ceil(threshold / ((kPi - 2.0 * beta) * A.r_in)));
    const double slot = A.width() / (2 * N + 1);
    const double delta = std::min(slot, 2.0 * lambda);
    if (!(delta > lambda)) {
        std::ostringstream os;
        os << N << " rings need thickness " << slot << " > lambda = " << lambda << " in width " << A.width();
        throw Error(ErrorKind::InfeasibleLabyrinth, os.str());
    }
    BuiltLabyrinth b;
    b.lab = make_labyrinth(A, N, delta, beta, lambda);
    b.cert.lambda = lambda;
    b.cert.threshold = threshold;
    b.cert.analytic_bound = analytic_star_bound(b.lab);
    b.cert.sampled_min = std::numeric_limits<double>::infinity();
    b.cert.valid = b.cert.analytic_bound >= threshold;
    return b;
}

bool membership(const Labyrinth& lab, cplx z) {
    const double r = std::abs(z);
    if (r < lab.A.r_in || r > lab.A.r_out) return false;
    for (int i = 0; i < lab.N; ++i) {
        if (std::abs(r - lab.radii[i]) <= 0.5 * lab.delta)
            return angle_dist(std::arg(z), lab.gate_angle(i)) > lab.beta;
    }
    return false;
}

PathVerdict check_path(const Labyrinth& lab, const std::vector<cplx>& polyline, double lambda, double threshold) {
    PathVerdict v;
    const double step = std::max(1e-4, std::min(lambda, lab.delta) / 16.0);
    double run = 0.0;
    bool prev_in = polyline.empty() ? false : membership(lab, polyline.front());
    for (std::size_t s = 1; s < polyline.size(); ++s) {
        cplx a = polyline[s - 1], b = polyline[s];
        double seg = std::abs(b - a);
        v.length += seg;
        int n = std::max(1, static_cast<int>(std::ceil(seg / step)));
        for (int k = 1; k <= n; ++k) {
            cplx z = a + (b - a) * (static_cast<double>(k) / n);
            bool in = membership(lab, z);
            if (in && prev_in) run += seg / n;
            else if (!in) run = 0.0;
            prev_in = in;
            v.longest_omega_run = std::max(v.longest_omega_run, run);
        }
    }
    v.long_omega_subpath = v.longest_omega_run > lambda;
    v.long_enough = v.length > threshold;
    return v;
}

StarCertificate verify_star(const Labyrinth& lab, double lambda, double threshold, int trials, std::uint64_t seed) {
    StarCertificate c;
    c.lambda = lambda;
    c.threshold = threshold;
    c.analytic_bound = analytic_star_bound(lab);
    c.trials = trials;
    c.sampled_min = std::numeric_limits<double>::infinity();
    const double rin = lab.A.r_in, rout = lab.A.r_out;
    const double step = std::max(1e-3, 0.25 * std::min(lambda, lab.delta));
    auto band_lo = [&](int i) { return lab.radii[i] - 0.5 * lab.delta; };
    auto band_hi = [&](int i) { return lab.radii[i] + 0.5 * lab.delta; };
    auto gap = [&](int i) { // gap below ring i (i == N: above the last ring)
        double lo = i == 0 ? rin : band_hi(i - 1);
        double hi = i == lab.N ? rout : band_lo(i);
        return std::make_pair(lo, hi);
    };
    std::ostringstream first_violation;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(t + 1)));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<cplx> path;
        const int kind = t % 3;
        if (kind == 0) {
            // random monotone-in-radius walk
            int K = 2 + static_cast<int>(U(rng) * 10);
            std::vector<double> rs{rin, rout};
            for (int k = 0; k < K; ++k) rs.push_back(rin + (rout - rin) * U(rng));
            std::sort(rs.begin(), rs.end());
            std::normal_distribution<double> dth(0.0, 1.0);
            double th = 2.0 * kPi * U(rng);
            for (std::size_t k = 1; k < rs.size(); ++k) {
                double th1 = th + dth(rng);
                append_polar(path, rs[k - 1], th, rs[k], th1, step);
                th = th1;
            }
        } else {
            // thread the gates; kind 2 also pushes through one wall
            int wall = kind == 2 ? static_cast<int>(U(rng) * lab.N) : -1;
            double r = rin;
            double th = lab.gate_angle(0) + (2.0 * U(rng) - 1.0) * 0.95 * lab.beta;
            for (int i = 0; i < lab.N; ++i) {
                double target = lab.gate_angle(i) + (2.0 * U(rng) - 1.0) * 0.95 * lab.beta;
                if (i == wall) target = lab.gate_angle(i) + kPi / 2 + (2.0 * U(rng) - 1.0);
                auto [glo, ghi] = gap(i);
                double rg = glo + (ghi - glo) * (0.2 + 0.6 * U(rng));
                double dir = U(rng) < 0.5 ? -1.0 : 1.0;
                double dth = std::remainder(target - th, 2.0 * kPi);
                if (dir * dth < 0) dth += dir * 2.0 * kPi;
                if (std::abs(dth) > 2.0 * kPi - 1e-12) dth = std::remainder(target - th, 2.0 * kPi);
                append_polar(path, r, th, rg, th, step);
                append_polar(path, rg, th, rg, th + dth, step);
                th += dth;
                auto [nlo, nhi] = gap(i + 1);
                double rn = nlo + (nhi - nlo) * (0.2 + 0.6 * U(rng));
                append_polar(path, rg, th, rn, th, step);
                r = rn;
            }
            append_polar(path, r, th, rout, th, step);
        }
        auto v = check_path(lab, path, lambda, threshold);
        if (!v.long_omega_subpath) c.sampled_min = std::min(c.sampled_min, v.length);
        if (!v.ok()) {
            if (c.violations == 0)
                first_violation << "trial " << t << ": length " << v.length << " <= " << threshold
                                << " with longest Omega-run " << v.longest_omega_run;
            ++c.violations;
        }
    }
    c.valid = c.violations == 0 && c.analytic_bound >= threshold;
    if (c.violations > 0) throw Error(ErrorKind::StarViolated, first_violation.str());
    return c;
}

std::vector<RingSamples> omega_samples(const Labyrinth& lab, int n_r, int n_theta, double grow) {
    std::vector<RingSamples> out;
    const double half = 0.5 * lab.delta * (1.0 + grow);
    const double gate = lab.beta * (1.0 - grow);
    for (int i = 0; i < lab.N; ++i) {
        for (int k = 0; k < n_r; ++k) {
            double r = n_r == 1 ? lab.radii[i] : lab.radii[i] - half + 2.0 * half * k / (n_r - 1);
            RingSamples rs{r, {}};
            for (int q = 0; q < n_theta; ++q) {
                double th = 2.0 * kPi * q / n_theta;
                if (angle_dist(th, lab.gate_angle(i)) > gate) rs.nodes.push_back(std::polar(r, th));
            }
            out.push_back(std::move(rs));
        }
    }
    return out;
}

} // namespace msdl
