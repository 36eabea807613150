#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "stars/errors.hpp"
#include "stars/problems.hpp"

using namespace stars;

namespace {

// Independent gradient oracle: central differences of the objective.
Eigen::VectorXd central_diff_gradient(const ProblemDef& def, const Eigen::VectorXd& x,
                                      double step_scale = 1e-6) {
    Eigen::VectorXd g(def.dim);
    const double step = step_scale * (1.0 + x.norm());
    for (int i = 0; i < def.dim; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        g[i] = (def.objective(xp) - def.objective(xm)) / (2.0 * step);
    }
    return g;
}

} // namespace

TEST_CASE("catalog carries the published metadata") {
    const std::map<std::string, std::tuple<int, int, double>> expected = {
        {"SROSENBR", {100, 100, 4e-5}}, {"BROYDN3D", {100, 100, 4e-5}},
        {"INTEGREQ", {100, 100, 1e-5}}, {"VARDIMNE", {100, 102, 1e-4}},
        {"Penalty2", {100, 200, 5e-5}}, {"ARWHDNE", {100, 198, 1e-4}},
        {"FREUROTH", {100, 198, 2e-4}}, {"CHEBYQAD", {100, 100, 4e-6}},
    };
    CHECK(catalog().size() == expected.size());
    for (const auto& def : catalog()) {
        REQUIRE(expected.count(def.name) == 1);
        const auto& [n, m, h_opt] = expected.at(def.name);
        CHECK(def.dim == n);
        CHECK(def.residual_count == m);
        CHECK(def.h_opt == h_opt);
        CHECK(def.start.size() == n);
    }
    CHECK(find_problem("SROSENBR").h_opt == 4e-5);
    CHECK_THROWS_AS(find_problem("NOSUCH"), ConfigError);
}

TEST_CASE("objectives at the start are finite and nonnegative") {
    for (const auto& def : catalog()) {
        const double f = def.objective(def.start);
        INFO(def.name << " f(x0) = " << f);
        CHECK(std::isfinite(f));
        CHECK(f >= 0.0);
    }
}

TEST_CASE("objectives are nonnegative wherever sampled") {
    RngStream rng = RngStream::from_key(55);
    for (const auto& def : catalog()) {
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXd x = def.start;
            for (int i = 0; i < def.dim; ++i) x[i] += 0.5 * rng.normal();
            CHECK(def.objective(x) >= 0.0);
        }
    }
}

TEST_CASE("evaluation is a pure function") {
    RngStream rng = RngStream::from_key(56);
    for (const auto& def : catalog()) {
        Eigen::VectorXd x = def.start;
        for (int i = 0; i < def.dim; ++i) x[i] += 0.1 * rng.normal();
        const double a = def.objective(x);
        const double b = def.objective(x);
        CHECK(a == b);
    }
}

TEST_CASE("SROSENBR vanishes at the all-ones minimizer") {
    const ProblemDef& def = find_problem("SROSENBR");
    CHECK(def.objective(Eigen::VectorXd::Ones(def.dim)) == 0.0);
}

TEST_CASE("VARDIMNE vanishes at all ones") {
    const ProblemDef& def = find_problem("VARDIMNE");
    CHECK(def.objective(Eigen::VectorXd::Ones(def.dim)) == 0.0);
}

TEST_CASE("BROYDN3D has a root reachable by damped Newton") {
    const ProblemDef& def = find_problem("BROYDN3D");
    const int n = def.dim;
    Eigen::VectorXd x = def.start;
    Eigen::VectorXd r(n);
    for (int it = 0; it < 50; ++it) {
        def.residuals(x, r);
        if (r.norm() < 1e-14) break;
        // tridiagonal Jacobian, assembled densely for the test
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            jac(i, i) = 3.0 - 4.0 * x[i];
            if (i > 0) jac(i, i - 1) = -1.0;
            if (i + 1 < n) jac(i, i + 1) = -2.0;
        }
        const Eigen::VectorXd step = jac.partialPivLu().solve(-r);
        double t = 1.0;
        const double base = r.norm();
        for (int back = 0; back < 30; ++back) {
            Eigen::VectorXd trial = x + t * step;
            def.residuals(trial, r);
            if (r.norm() < base) {
                x = trial;
                break;
            }
            t /= 2.0;
        }
    }
    CHECK(def.objective(x) <= 1e-16);
}

TEST_CASE("analytic gradients match central differences at the start") {
    // The tighter 1e-6 check at x0 needs a smaller oracle step: at 1e-6(1+|x|)
    // the central-difference truncation itself exceeds 1e-6 on CHEBYQAD.
    for (const auto& def : catalog()) {
        const Eigen::VectorXd analytic = def.gradient(def.start);
        const Eigen::VectorXd numeric = central_diff_gradient(def, def.start, 1e-7);
        const double rel = (analytic - numeric).norm() / (1.0 + numeric.norm());
        INFO(def.name << " relative gradient error " << rel);
        CHECK(rel <= 1e-6);
    }
}

TEST_CASE("analytic gradients match central differences at random points") {
    RngStream rng = RngStream::from_key(57);
    for (const auto& def : catalog()) {
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd x = def.start;
            for (int i = 0; i < def.dim; ++i) x[i] += 0.2 * rng.normal();
            const Eigen::VectorXd analytic = def.gradient(x);
            const Eigen::VectorXd numeric = central_diff_gradient(def, x);
            const double rel = (analytic - numeric).norm() / (1.0 + numeric.norm());
            INFO(def.name << " trial " << trial << " relative error " << rel);
            CHECK(rel <= 1e-5);
        }
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const ProblemDef& def = find_problem("SROSENBR");
    CHECK_THROWS_AS(def.objective(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("make_noisy wires the objective and gradient through") {
    const ProblemDef& def = find_problem("BROYDN3D");
    NoisyProblem problem = make_noisy(def, {NoiseForm::additive, NoiseDist::gaussian, 0.0},
                                      RngStream::from_key(58));
    CHECK(problem.true_value(def.start) == def.objective(def.start));
    CHECK(problem.sample(def.start) == def.objective(def.start));
    REQUIRE(static_cast<bool>(problem.gradient));
    CHECK(problem.gradient(def.start).isApprox(def.gradient(def.start)));
}
