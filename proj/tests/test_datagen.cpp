#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "datagen.hpp"
#include "rng.hpp"

using namespace mnr;
using datagen::CovKind;
using datagen::CovSpec;
using datagen::Dataset;
using datagen::Family;
using datagen::ModelSpec;
using numkit::Matrix;

namespace {

double column_corr(const Matrix &x, std::size_t a, std::size_t b) {
    const std::size_t n = x.rows();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += x(i, a);
        mb += x(i, b);
    }
    ma /= double(n);
    mb /= double(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = x(i, a) - ma, db = x(i, b) - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_SUITE("datagen") {

TEST_CASE("toeplitz covariance reproduces pairwise correlations") {
    const CovSpec spec{CovKind::toeplitz, 0.9, 4};
    const Matrix x = datagen::sample_mvn(100000, spec, 7u);
    CHECK(column_corr(x, 0, 1) == doctest::Approx(0.9).epsilon(0.012));
    CHECK(column_corr(x, 0, 2) == doctest::Approx(0.81).epsilon(0.015));
    CHECK(column_corr(x, 1, 3) == doctest::Approx(0.81).epsilon(0.015));
}

TEST_CASE("equicorr covariance and PD validation") {
    const CovSpec spec{CovKind::equicorr, 0.5, 3};
    const Matrix sigma = datagen::build_cov(spec);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(sigma(i, j) == (i == j ? 1.0 : 0.5));
    CHECK_THROWS_AS(datagen::build_cov(CovSpec{CovKind::equicorr, -0.9, 3}),
                    Error); // needs rho > -1/(p-1) = -0.5
}

TEST_CASE("ar2 precision sampling matches the target precision matrix") {
    const std::size_t p = 5;
    const CovSpec spec{CovKind::ar2_precision, 0.0, p};
    const Matrix theta = datagen::build_cov(spec); // precision, by contract
    CHECK(theta(0, 0) == 1.0);
    CHECK(theta(0, 1) == 0.5);
    CHECK(theta(0, 2) == 0.25);
    CHECK(theta(0, 3) == 0.0);

    const std::size_t n = 100000;
    const Matrix x = datagen::sample_mvn(n, spec, 11u);
    Matrix cov(p, p);
    std::vector<double> mean(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < p; ++a)
            mean[a] += x(i, a);
    for (double &m : mean)
        m /= double(n);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
            cov(a, b) = s / double(n - 1);
        }
    const Matrix prec_hat = numkit::invert_spd(cov);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b)
            CHECK(prec_hat(a, b) == doctest::Approx(theta(a, b)).scale(1.0).epsilon(0.03));
}

TEST_CASE("gaussian response follows beta0 + X beta + noise") {
    const std::size_t n = 50000;
    ModelSpec model;
    model.family = Family::gaussian;
    model.beta0 = 1.0;
    model.beta = {{0, 2.0}, {3, -1.0}};
    model.sigma2 = 0.25;
    const CovSpec spec{CovKind::identity, 0.0, 4};
    Matrix x = datagen::sample_mvn(n, spec, 3u);
    const Dataset ds = datagen::gen_response(x, model, 3u);
    REQUIRE(ds.y.size() == n);
    // Residual variance against the generative mean identifies sigma2.
    double mse = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = 1.0 + 2.0 * ds.x(i, 0) - 1.0 * ds.x(i, 3);
        mse += (ds.y[i] - mu) * (ds.y[i] - mu);
        mean_y += ds.y[i];
    }
    CHECK(mse / double(n) == doctest::Approx(0.25).epsilon(0.03));
    CHECK(mean_y / double(n) == doctest::Approx(1.0).scale(1.0).epsilon(0.02));
}

TEST_CASE("binomial response rate matches the logistic intercept") {
    ModelSpec model;
    model.family = Family::binomial;
    model.beta0 = std::log(3.0); // P(y=1) = 0.75 with no signal
    const CovSpec spec{CovKind::identity, 0.0, 2};
    Matrix x = datagen::sample_mvn(40000, spec, 5u);
    const Dataset ds = datagen::gen_response(x, model, 5u);
    double ones = 0.0;
    for (double v : ds.y) {
        CHECK((v == 0.0 || v == 1.0));
        ones += v;
    }
    CHECK(ones / double(ds.n()) == doctest::Approx(0.75).epsilon(0.01));
}

TEST_CASE("cox censoring fraction matches the competing-exponentials rate") {
    // At beta = 0: event time ~ Exp(rate 1/lambda0), censor ~ Exp(rate
    // 1/lambda_c); P(censored) = (1/lambda_c) / (1/lambda_c + 1/lambda0).
    ModelSpec model;
    model.family = Family::cox;
    model.lambda0 = 0.1;
    model.lambda_c = 1.0;
    const CovSpec spec{CovKind::identity, 0.0, 2};
    Matrix x = datagen::sample_mvn(40000, spec, 9u);
    const Dataset ds = datagen::gen_response(x, model, 9u);
    REQUIRE(ds.event.size() == ds.n());
    double censored = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        CHECK(ds.y[i] > 0.0);
        censored += ds.event[i] == 0 ? 1.0 : 0.0;
    }
    CHECK(censored / double(ds.n()) == doctest::Approx(1.0 / 11.0).epsilon(0.06));

    // Strong positive signal shortens event times via e^{-x beta}.
    ModelSpec strong = model;
    strong.beta = {{0, 2.0}};
    const Dataset ds2 = datagen::gen_response(datagen::sample_mvn(40000, spec, 13u),
                                              strong, 13u);
    double mean_t_high = 0.0, mean_t_low = 0.0;
    std::size_t nh = 0, nl = 0;
    for (std::size_t i = 0; i < ds2.n(); ++i) {
        if (ds2.event[i] == 0) continue;
        if (ds2.x(i, 0) > 0.5) {
            mean_t_high += ds2.y[i];
            ++nh;
        } else if (ds2.x(i, 0) < -0.5) {
            mean_t_low += ds2.y[i];
            ++nl;
        }
    }
    REQUIRE(nh > 100);
    REQUIRE(nl > 100);
    CHECK(mean_t_high / double(nh) < mean_t_low / double(nl));
}

TEST_CASE("standardize centers, scales, composes and validates") {
    const CovSpec spec{CovKind::toeplitz, 0.5, 3};
    Matrix x = datagen::sample_mvn(500, spec, 21u);
    for (std::size_t i = 0; i < 500; ++i)
        x(i, 1) = 4.0 * x(i, 1) + 7.0;
    ModelSpec model;
    model.beta = {{0, 1.0}};
    Dataset ds = datagen::gen_response(x, model, 21u);
    const Dataset raw = ds;
    datagen::standardize(ds);
    CHECK(ds.standardized);
    for (std::size_t j = 0; j < 3; ++j) {
        double m = 0.0, v = 0.0;
        for (std::size_t i = 0; i < 500; ++i)
            m += ds.x(i, j);
        m /= 500.0;
        for (std::size_t i = 0; i < 500; ++i)
            v += (ds.x(i, j) - m) * (ds.x(i, j) - m);
        v /= 499.0;
        CHECK(std::fabs(m) < 1e-12);
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
    // center/scale reconstruct the original columns
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(raw.x(i, j) ==
                  doctest::Approx(ds.x(i, j) * ds.scale[j] + ds.center[j]).epsilon(1e-12));
    // idempotence up to floating noise: scales compose to ~1
    Dataset twice = ds;
    datagen::standardize(twice);
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(twice.x(i, 0) == doctest::Approx(ds.x(i, 0)).epsilon(1e-10));

    Dataset bad = raw;
    for (std::size_t i = 0; i < 500; ++i)
        bad.x(i, 2) = 3.25;
    try {
        datagen::standardize(bad);
        FAIL("expected a constant-column error");
    } catch (const Error &e) {
        CHECK(e.code() == errc::numeric);
        CHECK(e.feature() == 2);
        CHECK(std::string(e.what()).find("3") != std::string::npos); // 1-based name
    }
}

TEST_CASE("seeded generation is bitwise reproducible and prefix-stable") {
    const CovSpec spec{CovKind::toeplitz, 0.8, 6};
    const Matrix a = datagen::sample_mvn(64, spec, 123u);
    const Matrix b = datagen::sample_mvn(64, spec, 123u);
    REQUIRE(a.rows() == b.rows());
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * 64 * 6) == 0);

    // Row streams depend only on (seed, row), so a longer run extends the
    // shorter one without disturbing it.
    const Matrix c = datagen::sample_mvn(128, spec, 123u);
    CHECK(std::memcmp(a.data(), c.data(), sizeof(double) * 64 * 6) == 0);

    const Matrix d = datagen::sample_mvn(64, spec, 124u);
    CHECK(std::memcmp(a.data(), d.data(), sizeof(double) * 64 * 6) != 0);

    ModelSpec model;
    model.beta = {{0, 1.0}, {5, -2.0}};
    const Dataset y1 = datagen::gen_response(a, model, 123u);
    const Dataset y2 = datagen::gen_response(b, model, 123u);
    CHECK(std::memcmp(y1.y.data(), y2.y.data(), sizeof(double) * 64) == 0);
}

TEST_CASE("dense_beta and signal_set expand the sparse spec") {
    ModelSpec model;
    model.beta = {{1, 2.0}, {4, -3.0}};
    const std::vector<double> full = datagen::dense_beta(model, 6);
    CHECK(full == std::vector<double>{0.0, 2.0, 0.0, 0.0, -3.0, 0.0});
    CHECK(datagen::signal_set(model) == std::vector<int>{1, 4});
    CHECK_THROWS_AS(datagen::dense_beta(model, 3), Error);
}

} // TEST_SUITE
