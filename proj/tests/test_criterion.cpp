#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "criterion.hpp"
#include "rng.hpp"

using namespace silc::criterion;

namespace {

Eigen::VectorXd random_vec(silc::rng::Stream& s, int n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * s.next_normal();
    return v;
}

}  // namespace

TEST_CASE("weight spec variants agree on equivalent weights") {
    const int n = 5;
    silc::rng::Stream s(11, 0);
    const Eigen::VectorXd x = random_vec(s, n);

    const WeightSpec scaled = WeightSpec::scaled(2.0);
    const WeightSpec diag =
        WeightSpec::diagonal(Eigen::VectorXd::Constant(n, 2.0));
    const WeightSpec full =
        WeightSpec::matrix(2.0 * Eigen::MatrixXd::Identity(n, n));

    CHECK((scaled.apply(x) - diag.apply(x)).norm() < 1e-14);
    CHECK((scaled.apply(x) - full.apply(x)).norm() < 1e-14);
    CHECK((scaled.gram_apply(x) - full.gram_apply(x)).norm() < 1e-13);
    CHECK(scaled.positive_definite(n));
    CHECK_FALSE(WeightSpec::zero().positive_definite(n));
    CHECK(WeightSpec::zero().apply(x).isZero());

    Eigen::MatrixXd accum_a = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd accum_b = Eigen::MatrixXd::Zero(n, n);
    scaled.add_gram(accum_a);
    full.add_gram(accum_b);
    CHECK((accum_a - accum_b).norm() < 1e-13);
}

TEST_CASE("fused difference matrix takes first differences") {
    const Eigen::MatrixXd D = Eigen::MatrixXd(build_fused_difference(4));
    REQUIRE(D.rows() == 3);
    REQUIRE(D.cols() == 4);
    Eigen::VectorXd f(4);
    f << 1.0, 3.0, 3.0, 7.0;
    const Eigen::VectorXd d = D * f;
    CHECK(d[0] == doctest::Approx(2.0));
    CHECK(d[1] == doctest::Approx(0.0));
    CHECK(d[2] == doctest::Approx(4.0));
}

TEST_CASE("incremental map inverts cumulative summation") {
    const int n = 6;
    const Eigen::MatrixXd D = Eigen::MatrixXd(build_incremental_map(n));
    REQUIRE(D.rows() == n);
    REQUIRE(D.cols() == n);
    silc::rng::Stream s(5, 0);
    const Eigen::VectorXd x = random_vec(s, n);
    const Eigen::VectorXd f = cumulative_sum(x);
    CHECK((D * f - x).lpNorm<Eigen::Infinity>() < 1e-14);
    // First row keeps the first sample itself.
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n);
    e0[0] = 1.0;
    CHECK(((D * e0)[0]) == doctest::Approx(1.0));
}

TEST_CASE("sparse fused penalty stacks weighted differences over identity") {
    const double alpha = 2.5;
    const int n = 4;
    const Eigen::MatrixXd D = Eigen::MatrixXd(build_sparse_fused(n, alpha));
    REQUIRE(D.rows() == 2 * n - 1);
    REQUIRE(D.cols() == n);
    const Eigen::MatrixXd Df =
        alpha * Eigen::MatrixXd(build_fused_difference(n));
    CHECK((D.topRows(n - 1) - Df).norm() < 1e-14);
    CHECK((D.bottomRows(n) - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-14);
}

TEST_CASE("criterion validation rejects bad fields") {
    CriterionSpec spec;
    spec.lambda = -1.0;
    CHECK_THROWS_AS(spec.validate(4), std::invalid_argument);
    spec.lambda = 0.0;
    spec.d_kind = DKind::SparseFused;
    spec.fusion_weight = 0.0;
    CHECK_THROWS_AS(spec.validate(4), std::invalid_argument);
    spec.fusion_weight = 1.0;
    spec.d_kind = DKind::Custom;
    CHECK_THROWS_AS(spec.validate(4), std::invalid_argument);
    spec.d_custom = Eigen::MatrixXd::Identity(4, 4);
    CHECK_NOTHROW(spec.validate(4));
}

TEST_CASE("penalty column rank by kind") {
    CriterionSpec spec;
    spec.d_kind = DKind::Identity;
    CHECK(spec.penalty_full_column_rank(5));
    spec.d_kind = DKind::Fused;
    CHECK_FALSE(spec.penalty_full_column_rank(5));
    spec.d_kind = DKind::SparseFused;
    CHECK(spec.penalty_full_column_rank(5));
    spec.d_kind = DKind::Custom;
    spec.d_custom = Eigen::MatrixXd(build_incremental_map(5));
    CHECK(spec.penalty_full_column_rank(5));
}

TEST_CASE("scalar criterion value computed by hand") {
    // J = 2, e_j = 1, f_j = 0, candidate f = 0.25:
    //   e_next = 1 - 2*0.25 = 0.5      -> 0.5 * 0.5^2        = 0.125
    //   W_f = 1:                          0.5 * 0.25^2       = 0.03125
    //   W_df = 2:                         0.5 * (2*0.25)^2   = 0.125
    //   lambda = 0.2, identity D:         0.2 * 0.25         = 0.05
    CriterionSpec spec;
    spec.We = WeightSpec::scaled(1.0);
    spec.Wf = WeightSpec::scaled(1.0);
    spec.Wdf = WeightSpec::scaled(2.0);
    spec.lambda = 0.2;
    Eigen::MatrixXd J(1, 1);
    J << 2.0;
    Eigen::VectorXd e(1), f0(1), f(1);
    e << 1.0;
    f0 << 0.0;
    f << 0.25;
    const double value = evaluate_criterion(spec, e, f0, f, J);
    CHECK(value == doctest::Approx(0.125 + 0.03125 + 0.125 + 0.05));
}

TEST_CASE("criterion is convex along random segments") {
    silc::rng::Stream s(17, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 3 + static_cast<int>(s.next_uniform() * 4);
        Eigen::MatrixXd J(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) J(i, j) = s.next_normal();
        CriterionSpec spec;
        spec.We = WeightSpec::scaled(1.0);
        spec.Wf = WeightSpec::scaled(0.3);
        spec.Wdf = WeightSpec::scaled(0.2);
        spec.lambda = 0.4;
        spec.d_kind = rep % 2 == 0 ? DKind::Identity : DKind::SparseFused;
        const Eigen::VectorXd e = random_vec(s, n);
        const Eigen::VectorXd f0 = random_vec(s, n);
        const Eigen::VectorXd a = random_vec(s, n, 2.0);
        const Eigen::VectorXd b = random_vec(s, n, 2.0);
        const double va = evaluate_criterion(spec, e, f0, a, J);
        const double vb = evaluate_criterion(spec, e, f0, b, J);
        const double vm =
            evaluate_criterion(spec, e, f0, (0.5 * (a + b)).eval(), J);
        CHECK(vm <= 0.5 * va + 0.5 * vb + 1e-10);
    }
}
