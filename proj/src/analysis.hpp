#pragma once

#include <vector>

#include "lti_core.hpp"

namespace silc::analysis {

enum class Window { Hann, Rectangular };

// Two-sided power spectral density on the positive half grid (0, pi].
// Convention: unit-variance white noise has flat density 1/(2*pi), so the
// density integrates to the signal variance over (-pi, pi].  Analytic
// spectra reuse the struct with nfft = segments = 0.
struct SpectrumEstimate {
    Eigen::VectorXd omega;  // bin centers 2*pi*k/nfft, k = 1..nfft/2
    Eigen::VectorXd phi;
    int nfft = 0;
    int segments = 0;  // periodogram count averaged over
};

// Averaged windowed periodogram over 50%-overlapping segments of every
// supplied signal.  segment_length 0 picks length/4 of the shortest signal
// rounded to the nearest power of two; explicit lengths must be even and
// no longer than the shortest signal.
SpectrumEstimate estimate_spectrum(const std::vector<Eigen::VectorXd>& signals,
                                   Window window = Window::Hann,
                                   int segment_length = 0);

// Density of the disturbance v = H n where n is white with variance
// lambda_e: |H(e^{-i w})|^2 * lambda_e / (2*pi) on the given grid.
SpectrumEstimate theoretical_phi_v(const lti::TransferFunction& H,
                                   double lambda_e,
                                   const Eigen::VectorXd& omega);

// Integral of the two-sided density over (-pi, pi] by mirror-summing the
// half grid; comparable to the mean square of a zero-mean signal.
double spectrum_power(const SpectrumEstimate& s);

// Mean of measured/reference over bins past the first skip_bins whose
// frequency lies in [omega_lo, omega_hi].
double band_average_ratio(const SpectrumEstimate& measured,
                          const SpectrumEstimate& reference, int skip_bins,
                          double omega_lo, double omega_hi);

enum class Verdict { Converges, Marginal, Diverges };

const char* verdict_name(Verdict v);

// Per-frequency contraction magnitude |Q(1 - L J)| and its supremum.
struct ConvergenceReport {
    Eigen::VectorXd omega;
    Eigen::VectorXd magnitude;
    double factor = 0.0;        // sup over finite grid points
    double argmax_omega = 0.0;  // where the sup is attained
    bool singular = false;      // response undefined somewhere on the grid
    Verdict verdict = Verdict::Marginal;
};

ConvergenceReport convergence_factor(const Eigen::VectorXcd& Q,
                                     const Eigen::VectorXcd& L,
                                     const Eigen::VectorXcd& J,
                                     const Eigen::VectorXd& omega);
ConvergenceReport convergence_factor(const lti::TransferFunction& Q,
                                     const lti::TransferFunction& L,
                                     const lti::TransferFunction& J,
                                     const Eigen::VectorXd& omega);

// phi_e = coef_r .* phi_r + coef_v .* phi_v on the shared grid.
struct SpectrumCoefficients {
    Eigen::VectorXd omega;
    Eigen::VectorXd coef_r;
    Eigen::VectorXd coef_v;
};

// Limit (trial -> infinity) coefficients; requires |Q(1-LJ)| < 1 on the
// whole grid and throws otherwise, naming the violating frequency.
SpectrumCoefficients limit_spectrum_coefficients(const Eigen::VectorXcd& Q,
                                                 const Eigen::VectorXcd& L,
                                                 const Eigen::VectorXcd& J,
                                                 const Eigen::VectorXd& omega);

// Coefficients after exactly j trials from f_0 = 0: the geometric partial
// sums replace the limits, so j = 0 gives coef_r = coef_v = 1.  No
// contraction hypothesis; growing responses simply grow.
SpectrumCoefficients finite_iteration_coefficients(long j,
                                                   const Eigen::VectorXcd& Q,
                                                   const Eigen::VectorXcd& L,
                                                   const Eigen::VectorXcd& J,
                                                   const Eigen::VectorXd& omega);

SpectrumEstimate limit_error_spectrum(const lti::TransferFunction& Q,
                                      const lti::TransferFunction& L,
                                      const lti::TransferFunction& J,
                                      const Eigen::VectorXd& phi_r,
                                      const Eigen::VectorXd& phi_v,
                                      const Eigen::VectorXd& omega);

SpectrumEstimate finite_iteration_spectrum(long j, const lti::TransferFunction& Q,
                                           const lti::TransferFunction& L,
                                           const lti::TransferFunction& J,
                                           const Eigen::VectorXd& phi_r,
                                           const Eigen::VectorXd& phi_v,
                                           const Eigen::VectorXd& omega);

// Limit noise amplification of inverse-model learning with gain alpha in
// (0, 1]: exact 1 + alpha^2/(2 alpha - alpha^2) and the small-gain
// first-order value 1 + alpha/2.
struct NoiseAmplification {
    double exact = 0.0;
    double first_order = 0.0;
};
NoiseAmplification noise_amplification(double alpha);

// Frequency-domain gain curves used by spectrum predictions.
struct FrequencyGains {
    Eigen::VectorXcd L;
    Eigen::VectorXcd Q;
};

// L = gain / J pointwise, Q = 1.
FrequencyGains inverse_model_frequency_gains(const Eigen::VectorXcd& J,
                                             double gain);

// Scalar-weight limit of the explicit update gains:
//   L = we^2 conj(J) / (we^2 |J|^2 + wdf^2)
//   Q = (we^2 |J|^2 + wdf^2) / (we^2 |J|^2 + wf^2 + wdf^2)
FrequencyGains norm_optimal_frequency_gains(const Eigen::VectorXcd& J,
                                            double we, double wf, double wdf);

}  // namespace silc::analysis
