#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stars/errors.hpp"
#include "stars/sketch.hpp"

using namespace stars;

namespace {

// Arbitrary-precision check of 4 eps^-2 ln(1/beta) via long double.
int min_dim_oracle(long double eps, long double beta) {
    const long double bound = 4.0L / (eps * eps) * std::log(1.0L / beta);
    long double p = std::ceil(bound);
    return p < 1.0L ? 1 : static_cast<int>(p);
}

} // namespace

TEST_CASE("gaussian_min_dim matches the bound") {
    CHECK(gaussian_min_dim(0.5, 0.1) == 37);
    CHECK(min_dim_oracle(0.5L, 0.1L) == 37);
    CHECK(gaussian_min_dim(0.25, 0.01) == 295);
    CHECK(min_dim_oracle(0.25L, 0.01L) == 295);
    // bound below 1 forces the minimum dimension
    CHECK(gaussian_min_dim(1.0 - 1e-9, 0.99) == 1);
    CHECK_THROWS_AS(gaussian_min_dim(0.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(gaussian_min_dim(1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(gaussian_min_dim(0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(gaussian_min_dim(0.5, 0.0), std::domain_error);
}

TEST_CASE("identity draw is the identity matrix") {
    RngStream rng = RngStream::from_key(1);
    const SketchMatrix q = draw_sketch(SketchEnsemble::identity(3), rng);
    CHECK(q.entries().isApprox(Eigen::MatrixXd::Identity(3, 3)));

    Eigen::VectorXd v(3);
    v << 1, 2, 3;
    CHECK(apply_transpose(q, v).isApprox(v));
    Eigen::VectorXd s(4);
    s << 1, 0, -1, 2;
    const SketchMatrix q4 = draw_sketch(SketchEnsemble::identity(4), rng);
    CHECK(lift(q4, s).isApprox(s));
    // round trip is exact for the identity ensemble
    CHECK(lift(q4, apply_transpose(q4, s)).isApprox(s));
}

TEST_CASE("hashing structure: r nonzeros of magnitude 1/sqrt(r) per row of Q") {
    RngStream rng = RngStream::from_key(7);
    for (int r : {1, 2, 3}) {
        const SketchMatrix q = draw_sketch(SketchEnsemble::hashing(40, 7, r), rng);
        const double mag = 1.0 / std::sqrt(static_cast<double>(r));
        for (int i = 0; i < q.rows(); ++i) {
            int nonzeros = 0;
            for (int j = 0; j < q.cols(); ++j) {
                const double e = q.entries()(i, j);
                if (e != 0.0) {
                    ++nonzeros;
                    CHECK(std::abs(e) == doctest::Approx(mag).epsilon(1e-15));
                }
            }
            CHECK(nonzeros == r);
        }
    }
}

TEST_CASE("hashing r=1 on a small instance has one +-1 per transpose-column") {
    RngStream rng = RngStream::from_key(123);
    const SketchMatrix q = draw_sketch(SketchEnsemble::hashing(5, 2, 1), rng);
    for (int i = 0; i < 5; ++i) {
        int nonzeros = 0;
        for (int j = 0; j < 2; ++j)
            if (q.entries()(i, j) != 0.0) {
                ++nonzeros;
                CHECK(std::abs(q.entries()(i, j)) == 1.0);
            }
        CHECK(nonzeros == 1);
    }
}

TEST_CASE("hand-built hashing matrix maps as expected") {
    // Every transpose-column holds a single +1 in row 0: Q^T = [1 1 1 1 1; 0 0 0 0 0].
    Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(5, 2);
    entries.col(0).setOnes();
    const SketchMatrix q(entries, SketchEnsemble::hashing(5, 2, 1), "hand");
    Eigen::VectorXd v = Eigen::VectorXd::Ones(5);
    const Eigen::VectorXd tv = apply_transpose(q, v);
    CHECK(tv[0] == 5.0);
    CHECK(tv[1] == 0.0);
    Eigen::VectorXd s(2);
    s << 2, 3;
    CHECK(lift(q, s).isApprox(Eigen::VectorXd::Constant(5, 2.0)));
}

TEST_CASE("gaussian entry statistics at n=1e4, p=50") {
    RngStream rng = RngStream::from_key(2024);
    const int n = 10000, p = 50;
    const SketchMatrix q = draw_sketch(SketchEnsemble::gaussian(n, p), rng);
    const double count = static_cast<double>(n) * p;
    const double mean = q.entries().sum() / count;
    // sd of the mean over n*p entries of variance 1/p
    CHECK(std::abs(mean) <= 3.0 / std::sqrt(count * p));
    const double var = (q.entries().array() - mean).square().sum() / (count - 1.0);
    CHECK(var == doctest::Approx(1.0 / p).epsilon(0.05));
}

TEST_CASE("gaussian matrices are dense") {
    RngStream rng = RngStream::from_key(5);
    const SketchMatrix q = draw_sketch(SketchEnsemble::gaussian(100, 10), rng);
    CHECK((q.entries().array() == 0.0).count() == 0);
}

TEST_CASE("apply_transpose of the zero vector is zero") {
    RngStream rng = RngStream::from_key(6);
    const SketchMatrix q = draw_sketch(SketchEnsemble::gaussian(30, 4), rng);
    CHECK(apply_transpose(q, Eigen::VectorXd::Zero(30)).norm() == 0.0);
    CHECK(lift(q, Eigen::VectorXd::Zero(4)).norm() == 0.0);
}

TEST_CASE("draws are bitwise deterministic given (ensemble, seed)") {
    for (auto ensemble : {SketchEnsemble::gaussian(37, 9), SketchEnsemble::hashing(37, 9, 2)}) {
        RngStream a = RngStream::from_key(11).derive("sketch");
        RngStream b = RngStream::from_key(11).derive("sketch");
        const SketchMatrix qa = draw_sketch(ensemble, a);
        const SketchMatrix qb = draw_sketch(ensemble, b);
        CHECK(qa.entries() == qb.entries());
    }
}

TEST_CASE("apply_transpose is linear") {
    RngStream rng = RngStream::from_key(8);
    const SketchMatrix q = draw_sketch(SketchEnsemble::gaussian(60, 12), rng);
    Eigen::VectorXd u(60), v(60);
    for (int i = 0; i < 60; ++i) {
        u[i] = rng.normal();
        v[i] = rng.normal();
    }
    const double a = 2.5, b = -1.25;
    const Eigen::VectorXd lhs = apply_transpose(q, a * u + b * v);
    const Eigen::VectorXd rhs = a * apply_transpose(q, u) + b * apply_transpose(q, v);
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
}

TEST_CASE("dimension mismatches are rejected") {
    RngStream rng = RngStream::from_key(9);
    const SketchMatrix q = draw_sketch(SketchEnsemble::gaussian(10, 3), rng);
    CHECK_THROWS_AS(apply_transpose(q, Eigen::VectorXd::Zero(11)), std::invalid_argument);
    CHECK_THROWS_AS(lift(q, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("ensemble validation") {
    CHECK_THROWS_AS(SketchEnsemble::gaussian(5, 6), ConfigError);
    CHECK_THROWS_AS(SketchEnsemble::hashing(5, 3, 0), ConfigError);
    CHECK_THROWS_AS(SketchEnsemble::hashing(5, 3, 4), ConfigError);
    SketchEnsemble bad_identity{EnsembleKind::identity, 5, 3, 1};
    CHECK_THROWS_AS(bad_identity.validate(), ConfigError);
    CHECK_THROWS_AS(AlignmentParams(0.0, 0.5), ConfigError);
    CHECK_THROWS_AS(AlignmentParams(0.5, 1.0), ConfigError);
}

TEST_CASE("empirical alignment: identity is always aligned") {
    RngStream rng = RngStream::from_key(10);
    Eigen::VectorXd v(6);
    v << 1, -2, 3, 0.5, 0, 4;
    const double freq =
        empirical_alignment(SketchEnsemble::identity(6), v, 50, AlignmentParams(0.5, 0.1), rng);
    CHECK(freq == 1.0);
    CHECK_THROWS_AS(
        empirical_alignment(SketchEnsemble::identity(6), Eigen::VectorXd::Zero(6), 10,
                            AlignmentParams(0.5, 0.1), rng),
        std::invalid_argument);
}

TEST_CASE("gaussian norm preservation at the JL dimension") {
    // p from the JL bound guarantees alignment probability >= 1 - beta.
    const double eps = 0.5, beta = 0.1;
    const int p = gaussian_min_dim(eps, beta);
    const int n = 200;
    RngStream rng = RngStream::from_key(77);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    v /= v.norm();
    const long trials = 10000;
    RngStream draw_rng = RngStream::from_key(78);
    const double freq = empirical_alignment(SketchEnsemble::gaussian(n, p), v, trials,
                                            AlignmentParams(eps, beta), draw_rng);
    const double sigma_binomial = std::sqrt(beta * (1.0 - beta) / trials);
    CHECK(freq >= 1.0 - beta - 3.0 * sigma_binomial);
}

TEST_CASE("hashing alignment frequency is reported, not asserted") {
    // The (l, r, p) triples that carry a provable hashing guarantee are
    // impractically large; at practical sizes the frequency is only reported.
    RngStream rng = RngStream::from_key(79);
    Eigen::VectorXd v(50);
    for (int i = 0; i < 50; ++i) v[i] = rng.normal();
    const double freq = empirical_alignment(SketchEnsemble::hashing(50, 10, 1), v, 500,
                                            AlignmentParams(0.5, 0.1), rng);
    CHECK(freq >= 0.0);
    CHECK(freq <= 1.0);
}

TEST_CASE("spectral norm estimate matches Eigen on small draws") {
    RngStream rng = RngStream::from_key(80);
    const SketchMatrix q = draw_sketch(SketchEnsemble::gaussian(20, 6), rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q.entries());
    CHECK(q.spectral_norm() == doctest::Approx(svd.singularValues().maxCoeff()).epsilon(1e-6));
    const SketchMatrix id = draw_sketch(SketchEnsemble::identity(5), rng);
    CHECK(id.spectral_norm() == doctest::Approx(1.0).epsilon(1e-9));
}
