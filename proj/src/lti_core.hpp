#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace silc::lti {

// Discrete-time rational transfer function in the unit-delay operator.
// Coefficients are stored in ascending powers of z^-1 and the denominator
// is normalized so den[0] == 1 on construction.  Every representable
// system is causal; one-sided advances needed for analysis are handled by
// lift_advance and by pointwise frequency-domain arithmetic.
struct TransferFunction {
    Eigen::VectorXd num;
    Eigen::VectorXd den;
    double sample_period = 1.0;

    TransferFunction() = default;
    TransferFunction(Eigen::VectorXd numerator, Eigen::VectorXd denominator,
                     double Ts);

    int order() const { return static_cast<int>(den.size()) - 1; }
};

// Complex response values paired with the grid (rad/sample) they were
// evaluated on.  Entries may be infinite where the denominator vanishes.
struct FrequencyResponse {
    Eigen::VectorXd omega;
    Eigen::VectorXcd value;
};

using LiftedOperator = Eigen::MatrixXd;

TransferFunction gain_tf(double k, double Ts);
TransferFunction delay_tf(int samples, double Ts);

// Series interconnection a*b by polynomial convolution.
TransferFunction series(const TransferFunction& a, const TransferFunction& b);

// Polynomial product of coefficient vectors (ascending powers).
Eigen::VectorXd poly_mul(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
// Sum with zero padding to the longer length.
Eigen::VectorXd poly_add(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Zero-initial-condition simulation by the direct-form difference equation.
Eigen::VectorXd simulate(const TransferFunction& sys, const Eigen::VectorXd& u);

// First n samples of the impulse response.
Eigen::VectorXd impulse_response(const TransferFunction& sys, int n);

// N x N lower-triangular Toeplitz matrix of the impulse response.
LiftedOperator lift(const TransferFunction& sys, int n);

// Finite-time matrix of z^{+advance} * sys: entry (i,k) = h[i - k + advance]
// where h is the impulse response of sys.  advance = 0 reduces to lift;
// advance > 0 yields a non-lower-triangular Toeplitz matrix used when an
// analysis step needs a bounded one-sided advance (for example a plant
// inverse whose delay has been pulled out).  The preview window equals n.
LiftedOperator lift_advance(const TransferFunction& sys, int n, int advance);

// Pointwise evaluation on the unit circle; a vanishing denominator is
// reported as an infinite value at that grid point.
FrequencyResponse frequency_response(const TransferFunction& sys,
                                     const Eigen::VectorXd& omega);

// Log-spaced grid on (0, pi].  Grids produced with refine = 1, 2, 4, ...
// are nested so refinement can only increase a supremum taken over them.
Eigen::VectorXd default_grid(int refine = 1);

// Supremum of |sys| over the grid; +inf if any grid point is singular.
double linf_norm(const TransferFunction& sys, const Eigen::VectorXd& omega);
double linf_norm(const FrequencyResponse& fr);

// Roots of a coefficient vector interpreted as a polynomial in z
// (ascending z^-1 list == descending z list), via the companion matrix.
std::vector<std::complex<double>> poly_roots_z(const Eigen::VectorXd& coeffs);

std::vector<std::complex<double>> poles(const TransferFunction& sys);
std::vector<std::complex<double>> zeros(const TransferFunction& sys);

// All poles strictly inside the unit circle.
bool is_stable(const TransferFunction& sys);
// All zeros strictly inside the unit circle.
bool is_minimum_phase(const TransferFunction& sys);

struct ClosedLoop {
    TransferFunction S;  // 1 / (1 + G*C)
    TransferFunction J;  // S * G
    bool stable = false;
};

// Unity-feedback interconnection formed by polynomial arithmetic alone;
// no pole-zero cancellation is attempted.
ClosedLoop feedback_connect(const TransferFunction& G,
                            const TransferFunction& C);

}  // namespace silc::lti
