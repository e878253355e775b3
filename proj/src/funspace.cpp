#include "msdl/funspace.hpp"

#include "msdl/error.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

namespace msdl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool same_domain(const AnnularDomain& a, const AnnularDomain& b) {
    return a.r_in == b.r_in && a.r_out == b.r_out;
}

void require_same(const Laurent& f, const Laurent& g) {
    if (!same_domain(f.domain(), g.domain()))
        throw Error(ErrorKind::InvalidGeometry, "Laurent operands live on different annuli");
}

// c * r^k without intermediate overflow
cplx scaled(cplx c, double r, int k) {
    if (c == cplx(0.0)) return c;
    double lg = std::log(std::abs(c)) + k * std::log(r);
    return std::polar(std::exp(lg), std::arg(c));
}

int pow2_at_least(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<cplx> fft_fwd(const std::vector<cplx>& in) {
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> out;
    fft.fwd(out, in);
    return out;
}

std::vector<cplx> fft_inv(const std::vector<cplx>& in) {
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> out;
    fft.inv(out, in);
    return out;
}

// Laurent coefficients of a function holomorphic on the closed annulus from its values on the
// boundary circles: k >= 0 from the outer circle, k < 0 from the inner one.
Laurent project(const AnnularDomain& dom, int m, const CircleValues& F) {
    const int N = pow2_at_least(std::max(4 * (m + 1), 256));
    Laurent out(dom, m);
    auto vo = fft_fwd(F(dom.r_out, N, 0.0));
    for (int k = 0; k <= m; ++k) out.set(k, scaled(vo[k] / double(N), dom.r_out, -k));
    if (!dom.is_disc()) {
        auto vi = fft_fwd(F(dom.r_in, N, 0.0));
        for (int k = 1; k <= m; ++k) out.set(-k, scaled(vi[N - k] / double(N), dom.r_in, k));
    }
    return out;
}

int validation_angles(int m) { return std::max(512, pow2_at_least(4 * m + 8)); }

void check_nonvanishing(const Laurent& f) {
    const auto& dom = f.domain();
    const int N = std::max(1024, pow2_at_least(8 * f.degree() + 8));
    double vmax = 0.0, vmin = std::numeric_limits<double>::infinity();
    const int n_r = 9;
    for (int i = 0; i < n_r; ++i) {
        double r = dom.is_disc() ? dom.r_out * (i + 1) / n_r : dom.r_in + dom.width() * i / (n_r - 1);
        for (double ph : {0.0, 0.5})
            for (const auto& v : f.eval_circle(r, N, ph)) {
                vmax = std::max(vmax, std::abs(v));
                vmin = std::min(vmin, std::abs(v));
            }
    }
    if (!(vmin > 1e-14 * vmax) || !std::isfinite(vmax)) {
        std::ostringstream os;
        os << "sampled min |f| = " << vmin << " (max " << vmax << ")";
        throw Error(ErrorKind::Nonvanishing, os.str());
    }
    int w_out = winding_number(f, dom.r_out, N);
    int w_in = dom.is_disc() ? 0 : winding_number(f, dom.r_in, N);
    if (w_out != w_in) {
        std::ostringstream os;
        os << "winding numbers differ on the boundary circles (" << w_in << " vs " << w_out
           << "): f has zeros inside";
        throw Error(ErrorKind::Nonvanishing, os.str());
    }
}

std::optional<std::pair<int, cplx>> as_monomial(const Laurent& f) {
    std::optional<std::pair<int, cplx>> mono;
    for (int k = -f.degree(); k <= f.degree(); ++k) {
        if (f.coeff(k) == cplx(0.0)) continue;
        if (mono) return std::nullopt;
        mono = std::make_pair(k, f.coeff(k));
    }
    return mono;
}

} // namespace

Laurent::Laurent(const AnnularDomain& dom, int m) : dom_(dom), m_(m), c_(2 * m + 1, cplx(0.0)) {
    if (m < 0) throw Error(ErrorKind::InvalidGeometry, "negative Laurent degree");
}

Laurent Laurent::constant(const AnnularDomain& dom, cplx c) {
    Laurent f(dom, 0);
    f.c_[0] = c;
    return f;
}

Laurent Laurent::monomial(const AnnularDomain& dom, int k, cplx c) {
    Laurent f(dom, std::abs(k));
    f.set(k, c);
    return f;
}

Laurent Laurent::from_map(const AnnularDomain& dom, const std::map<int, cplx>& coeffs) {
    Laurent f(dom, 0);
    for (const auto& [k, v] : coeffs) f.set(k, v);
    return f;
}

void Laurent::grow(int m) {
    if (m <= m_) return;
    std::vector<cplx> c(2 * m + 1, cplx(0.0));
    for (int k = -m_; k <= m_; ++k) c[k + m] = c_[k + m_];
    c_.swap(c);
    m_ = m;
}

void Laurent::set(int k, cplx v) {
    grow(std::abs(k));
    c_[k + m_] = v;
}

cplx Laurent::eval_unchecked(cplx z) const {
    cplx pos = 0.0;
    for (int k = m_; k >= 0; --k) pos = pos * z + c_[k + m_];
    bool has_neg = false;
    for (int k = 1; k <= m_ && !has_neg; ++k) has_neg = c_[m_ - k] != cplx(0.0);
    if (!has_neg) return pos;
    cplx w = 1.0 / z, neg = 0.0;
    for (int k = m_; k >= 1; --k) neg = (neg + c_[m_ - k]) * w;
    return pos + neg;
}

cplx Laurent::operator()(cplx z) const {
    if (!dom_.contains(z)) {
        std::ostringstream os;
        os << "|z| = " << std::abs(z) << " outside [" << dom_.r_in << ", " << dom_.r_out << "]";
        throw Error(ErrorKind::OutOfDomain, os.str());
    }
    return eval_unchecked(z);
}

std::vector<cplx> Laurent::eval_circle(double r, int N, double phase) const {
    std::vector<cplx> b(N, cplx(0.0));
    for (int k = -m_; k <= m_; ++k) {
        cplx c = c_[k + m_];
        if (c == cplx(0.0)) continue;
        cplx t = scaled(c, r, k) * std::polar(1.0, kTwoPi * k * phase / N);
        b[((k % N) + N) % N] += t;
    }
    return fft_inv(b);
}

bool Laurent::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](cplx v) { return v == cplx(0.0); });
}

bool Laurent::is_constant(cplx v) const {
    for (int k = -m_; k <= m_; ++k)
        if (c_[k + m_] != (k == 0 ? v : cplx(0.0))) return false;
    return true;
}

double Laurent::coefficient_bound() const {
    double s_out = 0.0, s_in = 0.0;
    for (int k = -m_; k <= m_; ++k) {
        s_out += std::abs(scaled(c_[k + m_], dom_.r_out, k));
        if (!dom_.is_disc()) s_in += std::abs(scaled(c_[k + m_], dom_.r_in, k));
    }
    return std::max(s_out, s_in);
}

Laurent& Laurent::trim(double rel) {
    double scale = coefficient_bound();
    auto contrib = [&](int k) {
        double a = std::abs(scaled(c_[k + m_], dom_.r_out, k));
        if (!dom_.is_disc()) a = std::max(a, std::abs(scaled(c_[k + m_], dom_.r_in, k)));
        return a;
    };
    int m = m_;
    while (m > 0 && contrib(m) <= rel * scale && contrib(-m) <= rel * scale) --m;
    if (m < m_) {
        std::vector<cplx> c(2 * m + 1);
        for (int k = -m; k <= m; ++k) c[k + m] = c_[k + m_];
        c_.swap(c);
        m_ = m;
    }
    return *this;
}

Laurent& Laurent::operator+=(const Laurent& o) {
    require_same(*this, o);
    grow(o.m_);
    for (int k = -o.m_; k <= o.m_; ++k) c_[k + m_] += o.c_[k + o.m_];
    return *this;
}

Laurent& Laurent::operator-=(const Laurent& o) {
    require_same(*this, o);
    grow(o.m_);
    for (int k = -o.m_; k <= o.m_; ++k) c_[k + m_] -= o.c_[k + o.m_];
    return *this;
}

Laurent& Laurent::operator*=(cplx s) {
    for (auto& v : c_) v *= s;
    return *this;
}

Laurent product(const Laurent& f, const Laurent& g) {
    require_same(f, g);
    const int mf = f.degree(), mg = g.degree();
    Laurent out(f.domain(), mf + mg);
    std::vector<cplx> acc(2 * (mf + mg) + 1, cplx(0.0));
    const auto& a = f.coeffs();
    const auto& b = g.coeffs();
    for (int i = 0; i < 2 * mf + 1; ++i) {
        if (a[i] == cplx(0.0)) continue;
        for (int j = 0; j < 2 * mg + 1; ++j) acc[i + j] += a[i] * b[j];
    }
    for (int k = -(mf + mg); k <= mf + mg; ++k) out.set(k, acc[k + mf + mg]);
    return out;
}

double validation_sup(const AnnularDomain& dom, const CircleValues& F, const CircleValues& G, int n_r,
                      int n_theta) {
    double sup = 0.0;
    for (int i = 0; i < n_r; ++i) {
        double r = dom.is_disc() ? dom.r_out * (i + 1) / n_r : dom.r_in + dom.width() * i / (n_r - 1);
        auto a = F(r, n_theta, 0.5);
        auto b = G(r, n_theta, 0.5);
        for (int j = 0; j < n_theta; ++j) {
            double e = std::abs(a[j] - b[j]);
            if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
            sup = std::max(sup, e);
        }
    }
    return sup;
}

int winding_number(const Laurent& f, double r, int N) {
    auto v = f.eval_circle(r, N);
    double total = 0.0;
    for (int j = 0; j < N; ++j) total += std::arg(v[(j + 1) % N] / v[j]);
    return static_cast<int>(std::lround(total / kTwoPi));
}

Laurent reciprocal(const Laurent& f, int degree, double tol) {
    check_nonvanishing(f);
    const auto& dom = f.domain();
    if (auto mono = as_monomial(f)) {
        if (mono->first <= degree) return Laurent::monomial(dom, -mono->first, 1.0 / mono->second);
    }
    Laurent r = project(dom, degree, [&](double rad, int N, double ph) {
        auto v = f.eval_circle(rad, N, ph);
        for (auto& x : v) x = 1.0 / x;
        return v;
    });
    const int nth = validation_angles(std::max(degree, f.degree()));
    double res = validation_sup(
        dom,
        [&](double rad, int N, double ph) {
            auto a = f.eval_circle(rad, N, ph);
            auto b = r.eval_circle(rad, N, ph);
            for (int j = 0; j < N; ++j) a[j] *= b[j];
            return a;
        },
        [](double, int N, double) { return std::vector<cplx>(N, cplx(1.0)); }, 9, nth);
    if (!(res < tol)) {
        std::ostringstream os;
        os << "reciprocal at degree " << degree << ": residual " << res << " >= tol " << tol;
        throw Error(ErrorKind::DegreeExhausted, os.str());
    }
    return r;
}

Laurent exp_series(const Laurent& f, int degree, double tol) {
    const auto& dom = f.domain();
    if (f.is_zero()) return Laurent::constant(dom, 1.0);
    if (f.degree() == 0 || f.is_constant(f.coeff(0))) return Laurent::constant(dom, std::exp(f.coeff(0)));
    auto expf = [&](double rad, int N, double ph) {
        auto v = f.eval_circle(rad, N, ph);
        for (auto& x : v) x = std::exp(x);
        return v;
    };
    Laurent E = project(dom, degree, expf);
    const int nth = validation_angles(std::max(degree, f.degree()));
    double res = validation_sup(
        dom, expf, [&](double rad, int N, double ph) { return E.eval_circle(rad, N, ph); }, 9, nth);
    if (!(res < tol)) {
        std::ostringstream os;
        os << "exp_series at degree " << degree << ": residual " << res << " >= tol " << tol;
        throw Error(ErrorKind::DegreeExhausted, os.str());
    }
    // E is within tol of a nonvanishing function; make sure tol does not swallow it
    double min_exp = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 9; ++i) {
        double r = dom.is_disc() ? dom.r_out * (i + 1) / 9 : dom.r_in + dom.width() * i / 8;
        for (auto& v : expf(r, nth, 0.5)) min_exp = std::min(min_exp, std::abs(v));
    }
    if (!(min_exp > 2.0 * tol)) throw Error(ErrorKind::Nonvanishing, "exp_series tolerance exceeds min |exp f|");
    return E;
}

Laurent reciprocal_auto(const Laurent& f, double tol, int m_start, int m_cap) {
    for (int m = std::max(1, m_start);; m *= 2) {
        int mm = std::min(m, m_cap);
        try {
            return reciprocal(f, mm, tol);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegreeExhausted || mm >= m_cap) throw;
        }
    }
}

Laurent exp_series_auto(const Laurent& f, double tol, int m_start, int m_cap) {
    for (int m = std::max(1, m_start);; m *= 2) {
        int mm = std::min(m, m_cap);
        try {
            return exp_series(f, mm, tol);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegreeExhausted || mm >= m_cap) throw;
        }
    }
}

int contour_nodes_for(int degree) { return std::max(64, pow2_at_least(2 * degree + 2)); }

cplx contour_integral(const std::vector<cplx>& nodes, const std::vector<cplx>& values) {
    const std::size_t N = nodes.size();
    cplx s = 0.0;
    for (std::size_t j = 0; j < N; ++j) s += values[j] * nodes[j];
    return s * cplx(0.0, kTwoPi / N);
}

cplx contour_integral(const Laurent& f, double r, int N) {
    if (N <= 2 * f.degree() + 1) {
        std::ostringstream os;
        os << "N = " << N << " must exceed 2m+1 = " << 2 * f.degree() + 1;
        throw Error(ErrorKind::Undersampled, os.str());
    }
    if (!f.domain().contains_radius(r) || (f.domain().is_disc() && r == 0.0))
        throw Error(ErrorKind::OutOfDomain, "contour radius outside the annulus");
    return contour_integral(sample_circle(r, N), f.eval_circle(r, N));
}

FitResult least_squares_fit(const AnnularDomain& dom, const std::vector<CurveSamples>& targets, int degree,
                            double ridge) {
    std::size_t rows = 0;
    for (const auto& t : targets) {
        if (t.nodes.size() != t.values.size()) throw Error(ErrorKind::InvalidGeometry, "samples size mismatch");
        rows += t.nodes.size();
    }
    const int cols = 2 * degree + 1;
    if (rows < static_cast<std::size_t>(cols))
        throw Error(ErrorKind::Undersampled, "fewer samples than Laurent unknowns");
    const bool ridge_rows = ridge > 0.0;
    Eigen::MatrixXcd A(rows + (ridge_rows ? cols : 0), cols);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(A.rows());
    A.setZero();
    auto Rk = [&](int k) { return (k >= 0 || dom.is_disc()) ? dom.r_out : dom.r_in; };
    std::size_t row = 0;
    for (const auto& t : targets) {
        double w = std::sqrt(t.weight);
        for (std::size_t s = 0; s < t.nodes.size(); ++s, ++row) {
            cplx z = t.nodes[s];
            for (int k = -degree; k <= degree; ++k) {
                if (dom.is_disc() && k < 0) continue;
                double rr = std::abs(z) / Rk(k);
                A(row, k + degree) = w * std::polar(std::pow(rr, k), k * std::arg(z));
            }
            b(row) = w * t.values[s];
        }
    }
    if (ridge_rows)
        for (int c = 0; c < cols; ++c) A(rows + c, c) = std::sqrt(ridge);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double smax = sv(0), smin = sv(sv.size() - 1);
    if (dom.is_disc()) {
        // the negative-power columns are structurally zero
        smin = sv(degree);
    }
    if (!(smin > 1e-13 * smax)) {
        std::ostringstream os;
        os << "least squares condition " << smax / smin << " at degree " << degree << " ridge " << ridge;
        throw Error(ErrorKind::Conditioning, os.str());
    }
    Eigen::VectorXcd x = svd.solve(b);
    FitResult out;
    out.f = Laurent(dom, degree);
    for (int k = -degree; k <= degree; ++k) {
        if (dom.is_disc() && k < 0) continue;
        out.f.set(k, scaled(x(k + degree), Rk(k), -k));
    }
    double sup = 0.0, ss = 0.0;
    for (const auto& t : targets)
        for (std::size_t s = 0; s < t.nodes.size(); ++s) {
            double e = std::abs(out.f.eval_unchecked(t.nodes[s]) - t.values[s]);
            sup = std::max(sup, e);
            ss += e * e;
        }
    out.sup_residual = sup;
    out.rms_residual = std::sqrt(ss / rows);
    return out;
}

} // namespace msdl
