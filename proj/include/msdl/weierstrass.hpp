#pragma once

#include "msdl/domain.hpp"
#include "msdl/funspace.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace msdl {

// phi = 2 du / dz; u = u(x0) + Re int phi dz
struct WeierstrassData {
    std::vector<Laurent> phi;
    AnnularDomain domain;

    int n() const { return static_cast<int>(phi.size()); }
    int degree() const;
    std::vector<cplx> values(cplx z) const;
};

struct FluxClass {
    std::vector<std::vector<double>> per_curve; // [curve][component]
};

struct Immersion {
    WeierstrassData data;
    cplx x0;
    std::vector<double> base_value;
};

struct Spinor {
    Laurent f, g, Psi;
};

struct RankResult {
    bool ok = false;
    int rank = 0;
    std::vector<double> singular_values;
};

struct PairCover {
    std::vector<std::pair<int, int>> pair_of;   // per family member, 0-based components
    std::vector<std::pair<int, int>> pairs;     // one per cover element
    std::vector<std::vector<int>> cover;        // member indices per cover element
};

WeierstrassData make_data(const AnnularDomain& dom, std::vector<Laurent> phi);
WeierstrassData preset(const std::string& name, const AnnularDomain& dom);
WeierstrassData catenoid(const AnnularDomain& dom);
WeierstrassData flat(const AnnularDomain& dom);
WeierstrassData catenoid4(const AnnularDomain& dom);

double conformality_residual(const WeierstrassData& w, int n_r = 64, int n_theta = 256);
double min_modulus(const WeierstrassData& w, int n_r = 16, int n_theta = 128);

// complex periods [curve][component] of phi dz
std::vector<std::vector<cplx>> periods(const WeierstrassData& w, const HomologyBasis& C);
double real_period_residual(const WeierstrassData& w, const HomologyBasis& C);
FluxClass flux(const WeierstrassData& w, const HomologyBasis& C, double period_tol = 1e-9);

enum class PathOrder { RadialFirst, AngularFirst };
std::vector<double> integrate_immersion(const Immersion& im, cplx z, PathOrder order = PathOrder::RadialFirst);

// Closed-form antiderivative of the data along radial-then-angular paths from x0.
class Primitive {
public:
    Primitive(const WeierstrassData& w, cplx x0, std::vector<double> base_value);
    std::vector<double> operator()(cplx z) const;
    // [component][node] at r exp(2 pi i (j + phase)/N)
    std::vector<std::vector<double>> on_circle(double r, int N, double phase = 0.0) const;

private:
    std::vector<Laurent> P_;
    std::vector<cplx> res_;
    std::vector<cplx> P_x0_;
    cplx x0_;
    std::vector<double> base_;
};

Spinor spinor_split(const WeierstrassData& w, int a, int b);
// the components a, b rebuilt from (f, g): phi_a = (f+g)/2, phi_b = (i/2)(f-g)
std::pair<Laurent, Laurent> spinor_join(const Laurent& f, const Laurent& g);

RankResult value_rank(const WeierstrassData& w, double tol = 1e-8);
RankResult is_nonflat(const WeierstrassData& w, double tol = 1e-8);
bool is_full(const WeierstrassData& w, double tol = 1e-8);
std::vector<cplx> rank_sample_points(const AnnularDomain& dom, int count);

// n = 3 only; keeps every period exactly
WeierstrassData perturb_to_full(const WeierstrassData& w, double delta, std::uint64_t seed, double tol = 1e-8);

double induced_speed(const WeierstrassData& w, cplx z);

PairCover select_pair(const std::vector<WeierstrassData>& family, double tol = 1e-3);
double pair_independence(const WeierstrassData& w, int a, int b);

} // namespace msdl
