#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fdia/casefile.hpp"
#include "fdia/dcmodel.hpp"
#include "fdia/error.hpp"
#include "fdia/estimator.hpp"
#include "fdia/rng.hpp"

using namespace fdia;

namespace {

CaseSystem triangle() {
    CaseSystem sys;
    sys.name = "toy3";
    sys.base_mva = 1.0;
    sys.slack_bus = 1;
    sys.buses = {{1, BusType::slack, 0.0, 0.0},
                 {2, BusType::pq, 1.0, 0.0},
                 {3, BusType::pq, 1.0, 0.0}};
    sys.branches = {{1, 2, 1.0, 0}, {1, 3, 1.0, 1}, {2, 3, 1.0, 2}};
    return sys;
}

std::vector<double> random_state(const MeasurementModel& model, Rng& rng, double scale = 0.1) {
    std::vector<double> x(model.state_dim());
    for (double& v : x) v = rng.normal(0.0, scale);
    return x;
}

// dense projector oracle: residual = (I - H (H^T H)^{-1} H^T) z, computed
// through an explicit inverse, independent of the QR path under test
std::vector<double> projector_residual(const Matrix& h, std::span<const double> z) {
    const Matrix ht = transposed(h);
    Matrix ata = matmul(ht, h);
    const std::size_t n = ata.rows();
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1.0;
    Matrix a = ata;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        for (std::size_t c = 0; c < n; ++c) {
            std::swap(a(col, c), a(pivot, c));
            std::swap(inv(col, c), inv(pivot, c));
        }
        const double d = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    const auto htz = matvec_transposed(h, z);
    const auto x = matvec(inv, htz);
    const auto hx = matvec(h, x);
    std::vector<double> residual(z.begin(), z.end());
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= hx[i];
    return residual;
}

} // namespace

TEST_CASE("noiseless measurements are recovered exactly") {
    const MeasurementModel model = build_h(builtin_case("case14"), 0.0);
    const WlsEstimator estimator(model);
    Rng rng(31);
    const auto x = random_state(model, rng);
    const auto z = model.flows(x);
    const EstimationResult result = estimator.estimate(z);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(result.x_hat.theta[i] - x[i]) < 1e-8);
    CHECK(result.residual_norm2 < 1e-12);
}

TEST_CASE("zero measurements estimate a zero state") {
    const MeasurementModel model = build_h(builtin_case("case14"), 0.0);
    const std::vector<double> z(model.meter_count(), 0.0);
    const EstimationResult result = wls_estimate(model, z);
    for (double v : result.x_hat.theta) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("residual norm matches the dense projector oracle") {
    const MeasurementModel model = build_h(builtin_case("case14"), 0.0);
    const WlsEstimator estimator(model);
    Rng rng(32);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> z(model.meter_count());
        for (double& v : z) v = rng.normal(0.0, 1.0);
        const EstimationResult result = estimator.estimate(z);
        const auto oracle = projector_residual(model.h(), z);
        CHECK(std::abs(result.residual_norm2 - norm2_squared(oracle)) < 1e-8);
    }
}

TEST_CASE("residual is orthogonal to the column space of H") {
    const MeasurementModel model = build_h(builtin_case("case30"), 0.0);
    const WlsEstimator estimator(model);
    Rng rng(33);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> z(model.meter_count());
        for (double& v : z) v = rng.normal(0.0, 1.0);
        const EstimationResult result = estimator.estimate(z);
        const auto htr = matvec_transposed(model.h(), result.residual);
        for (double v : htr) CHECK(std::abs(v) < 1e-8);
    }
}

TEST_CASE("estimation is idempotent") {
    const MeasurementModel model = build_h(builtin_case("case14"), 0.0);
    const WlsEstimator estimator(model);
    Rng rng(34);
    std::vector<double> z(model.meter_count());
    for (double& v : z) v = rng.normal(0.0, 1.0);
    const auto first = estimator.estimate(z);
    const auto second = estimator.estimate(model.flows(first.x_hat.theta));
    for (std::size_t i = 0; i < first.x_hat.theta.size(); ++i)
        CHECK(std::abs(first.x_hat.theta[i] - second.x_hat.theta[i]) < 1e-10);
}

TEST_CASE("stealth vector on the hand triangle") {
    const MeasurementModel model = build_h(triangle(), 0.0);
    const std::vector<double> c{1.0, 0.0};
    const StealthVector sv = stealth_vector(model, c);
    // H c with H = [[-1,0],[0,-1],[1,-1]]
    CHECK(sv.a[0] == doctest::Approx(-1.0));
    CHECK(sv.a[1] == doctest::Approx(0.0));
    CHECK(sv.a[2] == doctest::Approx(1.0));
}

TEST_CASE("zero state offset gives a zero stealth vector") {
    const MeasurementModel model = build_h(builtin_case("case14"), 0.0);
    const std::vector<double> c(model.state_dim(), 0.0);
    const StealthVector sv = stealth_vector(model, c);
    for (double v : sv.a) CHECK(v == 0.0);
}

TEST_CASE("stealth offsets leave the residual norm unchanged") {
    for (const char* name : {"case14", "case30"}) {
        const MeasurementModel model = build_h(builtin_case(name), 0.0);
        const WlsEstimator estimator(model);
        Rng rng(35);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> z(model.meter_count());
            for (double& v : z) v = rng.normal(0.0, 1.0);
            std::vector<double> c(model.state_dim());
            for (double& v : c) v = rng.normal(0.0, 0.5);
            const StealthVector sv = stealth_vector(model, c);
            std::vector<double> attacked = z;
            for (std::size_t i = 0; i < attacked.size(); ++i) attacked[i] += sv.a[i];
            const double before = estimator.estimate(z).residual_norm2;
            const double after = estimator.estimate(attacked).residual_norm2;
            CHECK(std::abs(before - after) < 1e-8);
        }
    }
}

TEST_CASE("stealth offsets never change the detector decision") {
    for (const auto& name : builtin_case_names()) {
        const MeasurementModel model = build_h(builtin_case(name), 0.01);
        const WlsEstimator estimator(model);
        Rng rng(36);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> z(model.meter_count());
            for (double& v : z) v = rng.normal(0.0, 0.05);
            std::vector<double> c(model.state_dim());
            for (double& v : c) v = rng.normal(0.0, 0.5);
            const StealthVector sv = stealth_vector(model, c);
            std::vector<double> attacked = z;
            for (std::size_t i = 0; i < attacked.size(); ++i) attacked[i] += sv.a[i];
            CHECK(estimator.bdd_detect(z).decision == estimator.bdd_detect(attacked).decision);
        }
    }
}

TEST_CASE("bdd flags gross errors and stays quiet on consistent data") {
    const double sigma = 0.01;
    const MeasurementModel model = build_h(builtin_case("case14"), sigma);
    const WlsEstimator estimator(model);
    Rng rng(37);

    SUBCASE("noiseless consistent measurement is clean") {
        const auto x = random_state(model, rng);
        CHECK(estimator.bdd_detect(model.flows(x)).decision == BddDecision::clean);
    }

    SUBCASE("a 10-sigma gross error is detected nearly always") {
        int detected = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const auto x = random_state(model, rng);
            auto z = measure(model, StateVector{x}, static_cast<std::uint64_t>(trial)).z;
            z[3] += 10.0 * sigma;
            if (estimator.bdd_detect(z).decision == BddDecision::bad_data) ++detected;
        }
        CHECK(detected > 990);
    }

    SUBCASE("false alarm rate tracks the confidence level") {
        const int trials = 10000;
        int alarms = 0;
        for (int trial = 0; trial < trials; ++trial) {
            const auto x = random_state(model, rng);
            const auto z = measure(model, StateVector{x}, static_cast<std::uint64_t>(trial)).z;
            if (estimator.bdd_detect(z, 0.95).decision == BddDecision::bad_data) ++alarms;
        }
        const double rate = static_cast<double>(alarms) / trials;
        CHECK(rate > 0.035);
        CHECK(rate < 0.065);
    }
}

TEST_CASE("bdd with zero sigma and nonzero residual is ill-posed") {
    const MeasurementModel model = build_h(builtin_case("case14"), 0.0);
    const WlsEstimator estimator(model);
    Rng rng(38);
    std::vector<double> z(model.meter_count());
    for (double& v : z) v = rng.normal(0.0, 1.0);
    CHECK_THROWS_AS(estimator.bdd_detect(z), SemanticError);
}

TEST_CASE("dimension mismatches are rejected") {
    const MeasurementModel model = build_h(builtin_case("case14"), 0.0);
    CHECK_THROWS_AS(wls_estimate(model, std::vector<double>(5, 0.0)), DimensionError);
    CHECK_THROWS_AS(stealth_vector(model, std::vector<double>(5, 0.0)), DimensionError);
}
