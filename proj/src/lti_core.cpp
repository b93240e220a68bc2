#include "lti_core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace silc::lti {

namespace {

constexpr double kCoeffTrimRel = 1e-14;

// Drop trailing coefficients that are zero relative to the largest one.
Eigen::VectorXd trim_trailing(const Eigen::VectorXd& c) {
    const double scale = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    int n = static_cast<int>(c.size());
    while (n > 1 && std::abs(c[n - 1]) <= kCoeffTrimRel * scale) --n;
    return c.head(n);
}

}  // namespace

TransferFunction::TransferFunction(Eigen::VectorXd numerator,
                                   Eigen::VectorXd denominator, double Ts)
    : num(std::move(numerator)), den(std::move(denominator)),
      sample_period(Ts) {
    if (num.size() == 0 || den.size() == 0)
        throw std::invalid_argument("transfer function: empty coefficient list");
    if (!num.allFinite() || !den.allFinite())
        throw std::invalid_argument("transfer function: non-finite coefficient");
    if (den[0] == 0.0)
        throw std::invalid_argument(
            "transfer function: denominator leading coefficient must be nonzero");
    if (!(Ts > 0.0) || !std::isfinite(Ts))
        throw std::invalid_argument("transfer function: sample period must be positive");
    num /= den[0];
    den /= den[0];
}

TransferFunction gain_tf(double k, double Ts) {
    Eigen::VectorXd n(1), d(1);
    n << k;
    d << 1.0;
    return {n, d, Ts};
}

TransferFunction delay_tf(int samples, double Ts) {
    if (samples < 0) throw std::invalid_argument("delay_tf: negative delay");
    Eigen::VectorXd n = Eigen::VectorXd::Zero(samples + 1);
    n[samples] = 1.0;
    Eigen::VectorXd d(1);
    d << 1.0;
    return {n, d, Ts};
}

Eigen::VectorXd poly_mul(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

Eigen::VectorXd poly_add(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(std::max(a.size(), b.size()));
    c.head(a.size()) = a;
    c.head(b.size()) += b;
    return c;
}

TransferFunction series(const TransferFunction& a, const TransferFunction& b) {
    if (a.sample_period != b.sample_period)
        throw std::invalid_argument("series: sample period mismatch");
    return {poly_mul(a.num, b.num), poly_mul(a.den, b.den), a.sample_period};
}

Eigen::VectorXd simulate(const TransferFunction& sys, const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    const int nb = static_cast<int>(sys.num.size());
    const int na = static_cast<int>(sys.den.size());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < n; ++t) {
        double acc = 0.0;
        const int kb = std::min(nb - 1, t);
        for (int k = 0; k <= kb; ++k) acc += sys.num[k] * u[t - k];
        const int ka = std::min(na - 1, t);
        for (int k = 1; k <= ka; ++k) acc -= sys.den[k] * y[t - k];
        y[t] = acc;  // den[0] == 1
    }
    return y;
}

Eigen::VectorXd impulse_response(const TransferFunction& sys, int n) {
    if (n < 0) throw std::invalid_argument("impulse_response: negative length");
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    if (n > 0) u[0] = 1.0;
    return simulate(sys, u);
}

LiftedOperator lift(const TransferFunction& sys, int n) {
    return lift_advance(sys, n, 0);
}

LiftedOperator lift_advance(const TransferFunction& sys, int n, int advance) {
    if (n <= 0) throw std::invalid_argument("lift: size must be positive");
    if (advance < 0) throw std::invalid_argument("lift: negative advance");
    const Eigen::VectorXd h = impulse_response(sys, n + advance);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const int lag = i - k + advance;
            if (lag >= 0) T(i, k) = h[lag];
        }
    return T;
}

FrequencyResponse frequency_response(const TransferFunction& sys,
                                     const Eigen::VectorXd& omega) {
    FrequencyResponse fr;
    fr.omega = omega;
    fr.value.resize(omega.size());
    const double den_scale = sys.den.cwiseAbs().maxCoeff();
    for (int i = 0; i < omega.size(); ++i) {
        const std::complex<double> w = std::polar(1.0, -omega[i]);  // z^-1
        std::complex<double> nv{0.0, 0.0}, dv{0.0, 0.0};
        std::complex<double> p{1.0, 0.0};
        for (int k = 0; k < std::max(sys.num.size(), sys.den.size()); ++k) {
            if (k < sys.num.size()) nv += sys.num[k] * p;
            if (k < sys.den.size()) dv += sys.den[k] * p;
            p *= w;
        }
        if (std::abs(dv) <= 1e-300 * std::max(1.0, den_scale)) {
            fr.value[i] = std::complex<double>(
                std::numeric_limits<double>::infinity(), 0.0);
        } else {
            fr.value[i] = nv / dv;
        }
    }
    return fr;
}

Eigen::VectorXd default_grid(int refine) {
    if (refine < 1) throw std::invalid_argument("default_grid: refine must be >= 1");
    constexpr int kBase = 4096;
    constexpr double kDecades = 6.0;  // omega_min = pi * 10^-6
    const int n = refine * (kBase - 1) + 1;  // nested across refinement levels
    Eigen::VectorXd w(n);
    const double lo = std::log10(M_PI) - kDecades;
    const double hi = std::log10(M_PI);
    for (int i = 0; i < n; ++i)
        w[i] = std::pow(10.0, lo + (hi - lo) * double(i) / double(n - 1));
    w[n - 1] = M_PI;
    return w;
}

double linf_norm(const FrequencyResponse& fr) {
    double m = 0.0;
    for (int i = 0; i < fr.value.size(); ++i) {
        const double a = std::abs(fr.value[i]);
        if (std::isinf(a) || std::isnan(a))
            return std::numeric_limits<double>::infinity();
        m = std::max(m, a);
    }
    return m;
}

double linf_norm(const TransferFunction& sys, const Eigen::VectorXd& omega) {
    return linf_norm(frequency_response(sys, omega));
}

std::vector<std::complex<double>> poly_roots_z(const Eigen::VectorXd& coeffs) {
    const Eigen::VectorXd c = trim_trailing(coeffs);
    const int deg = static_cast<int>(c.size()) - 1;
    std::vector<std::complex<double>> roots;
    if (deg < 1) return roots;
    if (c[0] == 0.0)
        throw std::invalid_argument("poly_roots_z: zero leading coefficient");
    // Ascending z^-1 coefficients are descending z coefficients, so the
    // companion matrix of c/c[0] yields the z-plane roots directly.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i < deg; ++i) companion(0, i) = -c[i + 1] / c[0];
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    roots.reserve(deg);
    for (int i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()[i]);
    return roots;
}

std::vector<std::complex<double>> poles(const TransferFunction& sys) {
    return poly_roots_z(sys.den);
}

std::vector<std::complex<double>> zeros(const TransferFunction& sys) {
    const Eigen::VectorXd c = trim_trailing(sys.num);
    // Leading numerator zeros are pure delays, not z-plane zeros.
    int first = 0;
    const double scale = c.cwiseAbs().maxCoeff();
    while (first < c.size() - 1 && std::abs(c[first]) <= kCoeffTrimRel * scale)
        ++first;
    return poly_roots_z(c.tail(c.size() - first));
}

bool is_stable(const TransferFunction& sys) {
    for (const auto& p : poles(sys))
        if (std::abs(p) >= 1.0) return false;
    return true;
}

bool is_minimum_phase(const TransferFunction& sys) {
    for (const auto& z : zeros(sys))
        if (std::abs(z) >= 1.0) return false;
    return true;
}

ClosedLoop feedback_connect(const TransferFunction& G,
                            const TransferFunction& C) {
    if (G.sample_period != C.sample_period)
        throw std::invalid_argument("feedback_connect: sample period mismatch");
    const Eigen::VectorXd den_ol = poly_mul(G.den, C.den);
    const Eigen::VectorXd num_ol = poly_mul(G.num, C.num);
    const Eigen::VectorXd den_cl = poly_add(den_ol, num_ol);
    const double scale =
        std::max(den_ol.cwiseAbs().maxCoeff(), num_ol.cwiseAbs().maxCoeff());
    if (den_cl.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument(
            "feedback_connect: 1 + G*C is degenerate (loop has no solution)");
    if (den_cl[0] == 0.0)
        throw std::invalid_argument(
            "feedback_connect: closed loop is not causal (algebraic loop)");
    ClosedLoop cl;
    cl.S = TransferFunction(den_ol, den_cl, G.sample_period);
    cl.J = TransferFunction(poly_mul(G.num, C.den), den_cl, G.sample_period);
    cl.stable = is_stable(cl.S);
    return cl;
}

}  // namespace silc::lti
