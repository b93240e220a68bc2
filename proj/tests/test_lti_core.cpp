#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "lti_core.hpp"

using namespace silc::lti;

namespace {

TransferFunction geometric(double a, double Ts = 1e-3) {
    Eigen::VectorXd num(1), den(2);
    num << 1.0;
    den << 1.0, -a;
    return TransferFunction(num, den, Ts);
}

}  // namespace

TEST_CASE("construction normalizes and validates") {
    Eigen::VectorXd num(1), den(2);
    num << 3.0;
    den << 2.0, -1.0;
    const TransferFunction tf(num, den, 1e-3);
    CHECK(tf.den[0] == 1.0);
    CHECK(tf.den[1] == doctest::Approx(-0.5));
    CHECK(tf.num[0] == doctest::Approx(1.5));

    Eigen::VectorXd bad_den(2);
    bad_den << 0.0, 1.0;
    CHECK_THROWS_AS(TransferFunction(num, bad_den, 1e-3),
                    std::invalid_argument);
    CHECK_THROWS_AS(TransferFunction(Eigen::VectorXd(), den, 1e-3),
                    std::invalid_argument);
    CHECK_THROWS_AS(TransferFunction(num, den, 0.0), std::invalid_argument);
}

TEST_CASE("impulse response of a one-pole system is geometric") {
    const Eigen::VectorXd h = impulse_response(geometric(0.5), 4);
    CHECK(h[0] == doctest::Approx(1.0));
    CHECK(h[1] == doctest::Approx(0.5));
    CHECK(h[2] == doctest::Approx(0.25));
    CHECK(h[3] == doctest::Approx(0.125));
}

TEST_CASE("simulate matches convolution with the impulse response") {
    const TransferFunction sys = geometric(0.7);
    const int n = 32;
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = std::sin(0.3 * i) + 0.1 * i;
    const Eigen::VectorXd h = impulse_response(sys, n);
    Eigen::VectorXd conv = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= i; ++k) conv[i] += h[i - k] * u[k];
    const Eigen::VectorXd y = simulate(sys, u);
    CHECK((y - conv).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(simulate(sys, Eigen::VectorXd::Zero(8)).isZero());
}

TEST_CASE("delay shifts and lifts to a shift matrix") {
    const TransferFunction d2 = delay_tf(2, 1e-3);
    Eigen::VectorXd u(5);
    u << 1.0, 2.0, 3.0, 4.0, 5.0;
    const Eigen::VectorXd y = simulate(d2, u);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 0.0);
    CHECK(y[2] == doctest::Approx(1.0));
    CHECK(y[4] == doctest::Approx(3.0));

    const LiftedOperator M = lift(d2, 4);
    CHECK(M(2, 0) == doctest::Approx(1.0));
    CHECK(M(3, 1) == doctest::Approx(1.0));
    CHECK(M(0, 0) == 0.0);
    CHECK(M(1, 0) == 0.0);
}

TEST_CASE("lift is the lower-triangular Toeplitz of the impulse response") {
    const TransferFunction sys = geometric(0.5);
    const LiftedOperator M = lift(sys, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (j > i) CHECK(M(i, j) == 0.0);
            else CHECK(M(i, j) == doctest::Approx(std::pow(0.5, i - j)));
        }
    Eigen::VectorXd u(4);
    u << 1.0, -1.0, 2.0, 0.5;
    CHECK((M * u - simulate(sys, u)).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("lift_advance") {
    const TransferFunction d1 = delay_tf(1, 1e-3);
    SUBCASE("advance 0 equals lift") {
        CHECK(lift_advance(d1, 5, 0) == lift(d1, 5));
    }
    SUBCASE("advancing a one-sample delay yields the identity") {
        CHECK((lift_advance(d1, 5, 1) - Eigen::MatrixXd::Identity(5, 5))
                  .lpNorm<Eigen::Infinity>() == 0.0);
    }
    SUBCASE("entry (i,k) is h[i-k+advance]") {
        const TransferFunction sys = geometric(0.5);
        const Eigen::VectorXd h = impulse_response(sys, 8);
        const LiftedOperator M = lift_advance(sys, 4, 2);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) {
                const int idx = i - k + 2;
                const double want = idx >= 0 ? h[idx] : 0.0;
                CHECK(M(i, k) == doctest::Approx(want));
            }
    }
}

TEST_CASE("frequency response of elementary systems") {
    const Eigen::VectorXd omega =
        Eigen::VectorXd::LinSpaced(7, 0.1, 3.0);
    SUBCASE("pure gain") {
        const FrequencyResponse fr =
            frequency_response(gain_tf(2.0, 1e-3), omega);
        for (int i = 0; i < omega.size(); ++i)
            CHECK(std::abs(fr.value[i] - 2.0) < 1e-14);
    }
    SUBCASE("one-sample delay is e^{-i omega}") {
        const FrequencyResponse fr =
            frequency_response(delay_tf(1, 1e-3), omega);
        for (int i = 0; i < omega.size(); ++i) {
            const std::complex<double> want =
                std::exp(std::complex<double>(0.0, -omega[i]));
            CHECK(std::abs(fr.value[i] - want) < 1e-14);
        }
    }
    SUBCASE("singular point reports infinity") {
        Eigen::VectorXd num(1), den(2);
        num << 1.0;
        den << 1.0, -1.0;  // pole at z = 1
        Eigen::VectorXd w(1);
        w << 0.0;
        const FrequencyResponse fr =
            frequency_response(TransferFunction(num, den, 1e-3), w);
        CHECK(std::isinf(std::abs(fr.value[0])));
    }
}

TEST_CASE("polynomial helpers") {
    Eigen::VectorXd a(2), b(2);
    a << 1.0, 1.0;
    b << 1.0, -1.0;
    const Eigen::VectorXd p = poly_mul(a, b);
    REQUIRE(p.size() == 3);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));
    CHECK(p[2] == doctest::Approx(-1.0));

    Eigen::VectorXd c(3);
    c << 1.0, 2.0, 3.0;
    const Eigen::VectorXd s = poly_add(a, c);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == doctest::Approx(2.0));
    CHECK(s[1] == doctest::Approx(3.0));
    CHECK(s[2] == doctest::Approx(3.0));
}

TEST_CASE("poles, zeros, stability") {
    Eigen::VectorXd num(2), den(3);
    num << 1.0, -0.5;           // zero at 0.5
    den << 1.0, -1.5, 0.56;     // poles 0.7 and 0.8
    const TransferFunction sys(num, den, 1e-3);
    const auto p = poles(sys);
    REQUIRE(p.size() == 2);
    const double p0 = std::min(std::abs(p[0]), std::abs(p[1]));
    const double p1 = std::max(std::abs(p[0]), std::abs(p[1]));
    CHECK(p0 == doctest::Approx(0.7));
    CHECK(p1 == doctest::Approx(0.8));
    CHECK(is_stable(sys));
    CHECK(is_minimum_phase(sys));

    Eigen::VectorXd num2(2);
    num2 << 1.0, -2.0;  // zero at 2
    CHECK_FALSE(is_minimum_phase(TransferFunction(num2, den, 1e-3)));

    Eigen::VectorXd den2(3);
    den2 << 1.0, -2.5, 1.0;  // poles 2 and 0.5
    CHECK_FALSE(is_stable(TransferFunction(num, den2, 1e-3)));
}

TEST_CASE("series connection multiplies responses") {
    const TransferFunction a = geometric(0.5);
    const TransferFunction b = delay_tf(1, 1e-3);
    const TransferFunction ab = series(a, b);
    const Eigen::VectorXd omega = Eigen::VectorXd::LinSpaced(5, 0.2, 2.0);
    const auto fa = frequency_response(a, omega).value;
    const auto fb = frequency_response(b, omega).value;
    const auto fab = frequency_response(ab, omega).value;
    for (int i = 0; i < omega.size(); ++i)
        CHECK(std::abs(fab[i] - fa[i] * fb[i]) < 1e-13);
}

TEST_CASE("unity feedback of two static gains") {
    const ClosedLoop loop =
        feedback_connect(gain_tf(1.0, 1e-3), gain_tf(1.0, 1e-3));
    CHECK(loop.stable);
    Eigen::VectorXd impulse = Eigen::VectorXd::Zero(4);
    impulse[0] = 1.0;
    const Eigen::VectorXd s = simulate(loop.S, impulse);
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s.tail(3).isZero(1e-15));
    const Eigen::VectorXd j = simulate(loop.J, impulse);
    CHECK(j[0] == doctest::Approx(0.5));
}

TEST_CASE("integrator under proportional feedback") {
    Eigen::VectorXd num(2), den(2);
    num << 0.0, 1.0;   // z^{-1}
    den << 1.0, -1.0;  // 1 - z^{-1}
    const TransferFunction G(num, den, 1e-3);
    const ClosedLoop loop = feedback_connect(G, gain_tf(0.5, 1e-3));
    CHECK(loop.stable);
    CHECK(is_stable(loop.J));
    // DC gain of J = G/(1+GC) tends to 1/C = 2.
    Eigen::VectorXd w(1);
    w << 1e-6;
    const auto j0 = frequency_response(loop.J, w).value[0];
    CHECK(std::abs(j0 - 2.0) < 1e-4);
}

TEST_CASE("default grid is log-spaced, ends at pi, and refines nestedly") {
    const Eigen::VectorXd g1 = default_grid(1);
    const Eigen::VectorXd g2 = default_grid(2);
    CHECK(g1[g1.size() - 1] == doctest::Approx(3.14159265358979).epsilon(1e-12));
    CHECK(g1[0] > 0.0);
    CHECK(g2.size() == 2 * (g1.size() - 1) + 1);
    for (int i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[2 * i]);
}

TEST_CASE("linf norm") {
    const Eigen::VectorXd grid = default_grid(1);
    CHECK(linf_norm(gain_tf(3.0, 1e-3), grid) == doctest::Approx(3.0));
    CHECK(linf_norm(delay_tf(1, 1e-3), grid) == doctest::Approx(1.0));
    // Nested grids can only raise the supremum.
    Eigen::VectorXd num(1), den(3);
    num << 0.01;
    den << 1.0, -1.9, 0.95;  // resonant pair
    const TransferFunction sys(num, den, 1e-3);
    CHECK(linf_norm(sys, default_grid(1)) <= linf_norm(sys, default_grid(2)));
}
