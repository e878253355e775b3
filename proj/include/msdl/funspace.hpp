#pragma once

#include "msdl/domain.hpp"

#include <functional>
#include <map>
#include <vector>

namespace msdl {

// Truncated Laurent series sum_{k=-m}^{m} c_k z^k on a closed annulus.
class Laurent {
public:
    Laurent() = default;
    Laurent(const AnnularDomain& dom, int m);

    static Laurent constant(const AnnularDomain& dom, cplx c);
    static Laurent monomial(const AnnularDomain& dom, int k, cplx c = 1.0);
    static Laurent from_map(const AnnularDomain& dom, const std::map<int, cplx>& coeffs);

    int degree() const { return m_; }
    const AnnularDomain& domain() const { return dom_; }
    cplx coeff(int k) const { return (k < -m_ || k > m_) ? cplx(0.0) : c_[k + m_]; }
    void set(int k, cplx v);
    const std::vector<cplx>& coeffs() const { return c_; }

    cplx operator()(cplx z) const; // throws out-of-domain
    cplx eval_unchecked(cplx z) const;
    // values at r*exp(2 pi i (j + phase)/N), j = 0..N-1
    std::vector<cplx> eval_circle(double r, int N, double phase = 0.0) const;

    bool is_zero() const;
    bool is_constant(cplx v) const;
    // drop trailing coefficients whose sup contribution on the domain is below rel * scale
    Laurent& trim(double rel);
    // sup over the two boundary circles of |c_k| r^k summed: a cheap bound of sup |f|
    double coefficient_bound() const;

    Laurent& operator+=(const Laurent& o);
    Laurent& operator-=(const Laurent& o);
    Laurent& operator*=(cplx s);
    friend Laurent operator+(Laurent a, const Laurent& b) { return a += b; }
    friend Laurent operator-(Laurent a, const Laurent& b) { return a -= b; }
    friend Laurent operator*(Laurent a, cplx s) { return a *= s; }
    friend Laurent operator*(cplx s, Laurent a) { return a *= s; }

private:
    void grow(int m);
    AnnularDomain dom_{};
    int m_ = 0;
    std::vector<cplx> c_{cplx(0.0)};
};

struct CurveSamples {
    std::vector<cplx> nodes;
    std::vector<cplx> values;
    double weight = 1.0;
};

struct FitResult {
    Laurent f;
    double sup_residual = 0.0;
    double rms_residual = 0.0;
};

Laurent product(const Laurent& f, const Laurent& g);
Laurent reciprocal(const Laurent& f, int degree, double tol);
Laurent exp_series(const Laurent& f, int degree, double tol);
// degree doubling from m_start until tol holds or m_cap is passed
Laurent reciprocal_auto(const Laurent& f, double tol, int m_start, int m_cap);
Laurent exp_series_auto(const Laurent& f, double tol, int m_start, int m_cap);

cplx contour_integral(const Laurent& f, double r, int N);
// trapezoid rule for sampled values on equispaced circle nodes
cplx contour_integral(const std::vector<cplx>& nodes, const std::vector<cplx>& values);
int contour_nodes_for(int degree);

// Ridge acts on coefficients of the scaled basis z^k / R_k^k (R_k = r_out for k >= 0, r_in for k < 0).
FitResult least_squares_fit(const AnnularDomain& dom, const std::vector<CurveSamples>& targets, int degree,
                            double ridge);

// Sup over the validation grid (radii incl. boundaries, half-shifted angles) of |F(z) - G(z)|.
using CircleValues = std::function<std::vector<cplx>(double r, int N, double phase)>;
double validation_sup(const AnnularDomain& dom, const CircleValues& F, const CircleValues& G, int n_r, int n_theta);

// Winding number of the values of f on the circle |z| = r.
int winding_number(const Laurent& f, double r, int N);

} // namespace msdl
