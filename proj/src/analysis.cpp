#include "analysis.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace silc::analysis {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool finite_c(const std::complex<double>& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
}

void check_grid(const Eigen::VectorXcd& Q, const Eigen::VectorXcd& L,
                const Eigen::VectorXcd& J, const Eigen::VectorXd& omega) {
    if (Q.size() != omega.size() || L.size() != omega.size() ||
        J.size() != omega.size())
        throw std::invalid_argument("analysis: response/grid size mismatch");
    if (omega.size() == 0)
        throw std::invalid_argument("analysis: empty frequency grid");
}

}  // namespace

SpectrumEstimate estimate_spectrum(const std::vector<Eigen::VectorXd>& signals,
                                   Window window, int segment_length) {
    if (signals.empty())
        throw std::invalid_argument("estimate_spectrum: need at least one signal");
    Eigen::Index min_n = signals.front().size();
    for (const auto& s : signals) min_n = std::min(min_n, s.size());
    if (min_n < 2)
        throw std::invalid_argument("estimate_spectrum: signals too short");

    int nfft = segment_length;
    if (nfft == 0) {
        const double target = std::max(2.0, static_cast<double>(min_n) / 4.0);
        const int e = static_cast<int>(std::lround(std::log2(target)));
        nfft = std::max(2, 1 << std::max(e, 1));
    }
    if (nfft < 2 || nfft % 2 != 0)
        throw std::invalid_argument("estimate_spectrum: segment length must be even");
    if (nfft > min_n)
        throw std::invalid_argument(
            "estimate_spectrum: segment longer than the shortest signal");

    Eigen::VectorXd w(nfft);
    for (int t = 0; t < nfft; ++t)
        w[t] = window == Window::Hann
                   ? 0.5 - 0.5 * std::cos(2.0 * kPi * t / nfft)
                   : 1.0;
    const double norm = 2.0 * kPi * w.squaredNorm();

    const int half = nfft / 2;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(half);
    int segments = 0;
    const int hop = nfft / 2;

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(nfft), out(nfft);
    for (const auto& s : signals) {
        for (Eigen::Index start = 0; start + nfft <= s.size(); start += hop) {
            for (int t = 0; t < nfft; ++t) in[t] = w[t] * s[start + t];
            fft.fwd(out, in);
            for (int k = 1; k <= half; ++k) acc[k - 1] += std::norm(out[k]) / norm;
            ++segments;
        }
    }

    SpectrumEstimate est;
    est.nfft = nfft;
    est.segments = segments;
    est.omega.resize(half);
    for (int k = 1; k <= half; ++k) est.omega[k - 1] = 2.0 * kPi * k / nfft;
    est.phi = segments ? (acc / segments).eval() : acc;
    return est;
}

SpectrumEstimate theoretical_phi_v(const lti::TransferFunction& H,
                                   double lambda_e,
                                   const Eigen::VectorXd& omega) {
    if (!(lambda_e >= 0.0))
        throw std::invalid_argument("theoretical_phi_v: lambda_e must be >= 0");
    const lti::FrequencyResponse fr = lti::frequency_response(H, omega);
    SpectrumEstimate est;
    est.omega = omega;
    est.phi = fr.value.cwiseAbs2() * (lambda_e / (2.0 * kPi));
    return est;
}

double spectrum_power(const SpectrumEstimate& s) {
    if (s.omega.size() == 0) return 0.0;
    const double dw = s.omega[0];  // Welch grid starts one bin above zero
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.omega.size(); ++i) {
        const bool nyquist = std::abs(s.omega[i] - kPi) < 1e-12;
        acc += s.phi[i] * (nyquist ? 1.0 : 2.0);
    }
    return dw * acc;
}

double band_average_ratio(const SpectrumEstimate& measured,
                          const SpectrumEstimate& reference, int skip_bins,
                          double omega_lo, double omega_hi) {
    if (measured.omega.size() != reference.omega.size())
        throw std::invalid_argument("band_average_ratio: grid size mismatch");
    double acc = 0.0;
    int count = 0;
    for (Eigen::Index i = skip_bins; i < measured.omega.size(); ++i) {
        const double w = measured.omega[i];
        if (w < omega_lo || w > omega_hi) continue;
        if (!(reference.phi[i] > 0.0)) continue;
        acc += measured.phi[i] / reference.phi[i];
        ++count;
    }
    if (count == 0)
        throw std::invalid_argument("band_average_ratio: empty band");
    return acc / count;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Converges: return "converges";
        case Verdict::Marginal: return "marginal";
        case Verdict::Diverges: return "diverges";
    }
    return "?";
}

ConvergenceReport convergence_factor(const Eigen::VectorXcd& Q,
                                     const Eigen::VectorXcd& L,
                                     const Eigen::VectorXcd& J,
                                     const Eigen::VectorXd& omega) {
    check_grid(Q, L, J, omega);
    ConvergenceReport rep;
    rep.omega = omega;
    rep.magnitude.resize(omega.size());
    rep.factor = 0.0;
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const std::complex<double> x = Q[i] * (1.0 - L[i] * J[i]);
        const double a = std::abs(x);
        rep.magnitude[i] = a;
        if (!finite_c(x)) {
            rep.singular = true;
            continue;
        }
        if (a > rep.factor) {
            rep.factor = a;
            rep.argmax_omega = omega[i];
        }
    }
    if (rep.factor > 1.0)
        rep.verdict = Verdict::Diverges;
    else if (rep.singular || rep.factor == 1.0)
        rep.verdict = Verdict::Marginal;
    else
        rep.verdict = Verdict::Converges;
    return rep;
}

ConvergenceReport convergence_factor(const lti::TransferFunction& Q,
                                     const lti::TransferFunction& L,
                                     const lti::TransferFunction& J,
                                     const Eigen::VectorXd& omega) {
    return convergence_factor(lti::frequency_response(Q, omega).value,
                              lti::frequency_response(L, omega).value,
                              lti::frequency_response(J, omega).value, omega);
}

SpectrumCoefficients limit_spectrum_coefficients(const Eigen::VectorXcd& Q,
                                                 const Eigen::VectorXcd& L,
                                                 const Eigen::VectorXcd& J,
                                                 const Eigen::VectorXd& omega) {
    check_grid(Q, L, J, omega);
    SpectrumCoefficients c;
    c.omega = omega;
    c.coef_r.resize(omega.size());
    c.coef_v.resize(omega.size());
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const std::complex<double> x = Q[i] * (1.0 - L[i] * J[i]);
        const double a2 = std::norm(x);
        if (!finite_c(x) || a2 >= 1.0) {
            std::ostringstream os;
            os << "limit spectrum undefined: |Q(1-LJ)| = " << std::sqrt(a2)
               << " at omega = " << omega[i] << " (need < 1 everywhere)";
            throw std::invalid_argument(os.str());
        }
        c.coef_r[i] = std::norm((1.0 - Q[i]) / (1.0 - x));
        c.coef_v[i] = 1.0 + std::norm(J[i] * Q[i] * L[i]) / (1.0 - a2);
    }
    return c;
}

SpectrumCoefficients finite_iteration_coefficients(long j,
                                                   const Eigen::VectorXcd& Q,
                                                   const Eigen::VectorXcd& L,
                                                   const Eigen::VectorXcd& J,
                                                   const Eigen::VectorXd& omega) {
    if (j < 0)
        throw std::invalid_argument("finite_iteration_coefficients: j must be >= 0");
    check_grid(Q, L, J, omega);
    SpectrumCoefficients c;
    c.omega = omega;
    c.coef_r.resize(omega.size());
    c.coef_v.resize(omega.size());
    const double dj = static_cast<double>(j);
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const std::complex<double> x = Q[i] * (1.0 - L[i] * J[i]);
        if (!finite_c(x)) {
            c.coef_r[i] = std::numeric_limits<double>::quiet_NaN();
            c.coef_v[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        // Geometric partial sum over the first j powers of x.
        std::complex<double> sum_j;
        if (x == std::complex<double>(1.0, 0.0))
            sum_j = dj;
        else
            sum_j = (1.0 - std::pow(x, dj)) / (1.0 - x);
        const double a2 = std::norm(x);
        const double var_factor =
            a2 == 1.0 ? dj : (1.0 - std::pow(a2, dj)) / (1.0 - a2);
        const std::complex<double> jql = J[i] * Q[i] * L[i];
        c.coef_r[i] = std::norm(1.0 - jql * sum_j);
        c.coef_v[i] = 1.0 + std::norm(jql) * var_factor;
    }
    return c;
}

namespace {

SpectrumEstimate combine(const SpectrumCoefficients& c,
                         const Eigen::VectorXd& phi_r,
                         const Eigen::VectorXd& phi_v) {
    if (phi_r.size() != c.omega.size() || phi_v.size() != c.omega.size())
        throw std::invalid_argument("error spectrum: input spectra/grid mismatch");
    SpectrumEstimate est;
    est.omega = c.omega;
    est.phi = c.coef_r.cwiseProduct(phi_r) + c.coef_v.cwiseProduct(phi_v);
    return est;
}

}  // namespace

SpectrumEstimate limit_error_spectrum(const lti::TransferFunction& Q,
                                      const lti::TransferFunction& L,
                                      const lti::TransferFunction& J,
                                      const Eigen::VectorXd& phi_r,
                                      const Eigen::VectorXd& phi_v,
                                      const Eigen::VectorXd& omega) {
    const auto c = limit_spectrum_coefficients(
        lti::frequency_response(Q, omega).value,
        lti::frequency_response(L, omega).value,
        lti::frequency_response(J, omega).value, omega);
    return combine(c, phi_r, phi_v);
}

SpectrumEstimate finite_iteration_spectrum(long j, const lti::TransferFunction& Q,
                                           const lti::TransferFunction& L,
                                           const lti::TransferFunction& J,
                                           const Eigen::VectorXd& phi_r,
                                           const Eigen::VectorXd& phi_v,
                                           const Eigen::VectorXd& omega) {
    const auto c = finite_iteration_coefficients(
        j, lti::frequency_response(Q, omega).value,
        lti::frequency_response(L, omega).value,
        lti::frequency_response(J, omega).value, omega);
    return combine(c, phi_r, phi_v);
}

NoiseAmplification noise_amplification(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("noise_amplification: alpha must be in (0, 1]");
    NoiseAmplification a;
    a.exact = 1.0 + alpha * alpha / (2.0 * alpha - alpha * alpha);
    a.first_order = 1.0 + 0.5 * alpha;
    return a;
}

FrequencyGains inverse_model_frequency_gains(const Eigen::VectorXcd& J,
                                             double gain) {
    FrequencyGains g;
    g.L = gain / J.array();
    g.Q = Eigen::VectorXcd::Ones(J.size());
    return g;
}

FrequencyGains norm_optimal_frequency_gains(const Eigen::VectorXcd& J,
                                            double we, double wf, double wdf) {
    const Eigen::ArrayXd j2 = J.cwiseAbs2().array();
    const Eigen::ArrayXd we2 = Eigen::ArrayXd::Constant(J.size(), we * we);
    const Eigen::ArrayXd denom_l = we2 * j2 + wdf * wdf;
    FrequencyGains g;
    g.L = (we2 * J.array().conjugate()) / denom_l;
    g.Q = (denom_l / (denom_l + wf * wf)).cast<std::complex<double>>();
    return g;
}

}  // namespace silc::analysis
