#include <doctest.h>

#include <random>
#include <vector>

#include "endodiff/dgp.hpp"
#include "endodiff/rng.hpp"
#include "support/stats.hpp"

using namespace endodiff;

namespace {

DgpSpec scalar_spec(EndogeneityMechanism mechanism, double beta = 1.0, double x_var = 1.0,
                    double noise_sd = 1.0) {
    DgpSpec spec;
    spec.beta = Vector::Constant(1, beta);
    spec.x_cov = Matrix::Constant(1, 1, x_var);
    spec.noise_sd = noise_sd;
    spec.mechanism = std::move(mechanism);
    return spec;
}

DgpSpec two_dim_spec(EndogeneityMechanism mechanism) {
    DgpSpec spec;
    spec.beta = Vector(2);
    spec.beta << 1.0, 2.0;
    spec.x_cov = Matrix(2, 2);
    spec.x_cov << 1.0, 0.3, 0.3, 1.0;
    spec.mechanism = std::move(mechanism);
    return spec;
}

Vector gamma2() {
    Vector g(2);
    g << 0.5, 0.25;
    return g;
}

double reconstruction_error(const DgpSpec& spec, const Sample& s) {
    const Vector residual = s.y - s.x * spec.beta - s.u;
    const double scale = std::max(1.0, s.y.cwiseAbs().maxCoeff());
    return residual.cwiseAbs().maxCoeff() / scale;
}

std::vector<DgpSpec> one_spec_per_mechanism() {
    return {
        two_dim_spec(Exogenous{}),
        two_dim_spec(LinearErrorCorrelation{gamma2()}),
        two_dim_spec(OmittedVariable{0.7, [] {
                         Vector l(2);
                         l << 0.5, 0.0;
                         return l;
                     }()}),
        scalar_spec(MeasurementError{Vector::Constant(1, 0.5)}),
        scalar_spec(Simultaneity{0.4}, 0.5),
    };
}

} // namespace

TEST_SUITE("dgp") {

TEST_CASE("generate_sample shapes and reconstruction identity") {
    DgpSpec spec;
    spec.beta = Vector(2);
    spec.beta << 1.0, 2.0;
    spec.x_cov = Matrix::Identity(2, 2);
    spec.mechanism = Exogenous{};

    const Sample s = generate_sample(spec, 100, 42);
    CHECK(s.x.rows() == 100);
    CHECK(s.x.cols() == 2);
    CHECK(s.y.size() == 100);
    CHECK(s.u.size() == 100);
    CHECK(s.n == 100);
    CHECK(s.seed == 42);
    CHECK(reconstruction_error(spec, s) < 1e-10);
}

TEST_CASE("generate_sample is a pure function of (spec, n, seed)") {
    const DgpSpec spec = two_dim_spec(LinearErrorCorrelation{gamma2()});
    const Sample a = generate_sample(spec, 250, 977);
    const Sample b = generate_sample(spec, 250, 977);
    CHECK((a.x.array() == b.x.array()).all());
    CHECK((a.y.array() == b.y.array()).all());
    CHECK((a.u.array() == b.u.array()).all());
    const Sample c = generate_sample(spec, 250, 978);
    CHECK_FALSE((a.x.array() == c.x.array()).all());
}

TEST_CASE("linear correlation: empirical Cov(x, u) near x_cov * gamma") {
    const DgpSpec spec = scalar_spec(LinearErrorCorrelation{Vector::Constant(1, 0.5)});
    const Sample s = generate_sample(spec, 100000, 7);
    const std::vector<double> xs(s.x.col(0).begin(), s.x.col(0).end());
    const std::vector<double> us(s.u.begin(), s.u.end());
    CHECK(std::abs(testsupport::covariance(xs, us) - 0.5) < 0.02);
}

TEST_CASE("theoretical_c closed forms") {
    SUBCASE("exogenous is zero") {
        const Vector c = theoretical_c(two_dim_spec(Exogenous{}));
        CHECK(c.size() == 2);
        CHECK(c.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identity covariance passes gamma through") {
        DgpSpec spec = two_dim_spec(LinearErrorCorrelation{[] {
            Vector g(2);
            g << 0.5, 0.0;
            return g;
        }()});
        spec.x_cov = Matrix::Identity(2, 2);
        const Vector c = theoretical_c(spec);
        CHECK(c(0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(c(1) == 0.0);
    }
    SUBCASE("general covariance multiplies gamma") {
        const Vector c = theoretical_c(two_dim_spec(LinearErrorCorrelation{gamma2()}));
        CHECK(c(0) == doctest::Approx(1.0 * 0.5 + 0.3 * 0.25).epsilon(1e-14));
        CHECK(c(1) == doctest::Approx(0.3 * 0.5 + 1.0 * 0.25).epsilon(1e-14));
    }
    SUBCASE("omitted variable is delta * loading") {
        Vector loading(2);
        loading << 0.5, 0.0;
        const Vector c = theoretical_c(two_dim_spec(OmittedVariable{0.7, loading}));
        CHECK(c(0) == doctest::Approx(0.35).epsilon(1e-14));
        CHECK(c(1) == 0.0);
    }
    SUBCASE("measurement error attenuation covariance") {
        const Vector c = theoretical_c(scalar_spec(MeasurementError{Vector::Constant(1, 0.5)}));
        CHECK(c(0) == doctest::Approx(-0.25).epsilon(1e-14));
    }
    SUBCASE("simultaneity reduced-form covariance") {
        const Vector c = theoretical_c(scalar_spec(Simultaneity{0.4}, 0.5));
        CHECK(c(0) == doctest::Approx(0.4 / 0.8).epsilon(1e-14));
    }
}

TEST_CASE("measurement-error c against a hand-rolled Monte Carlo oracle") {
    // Independent draws of the errors-in-variables model, no library code.
    std::mt19937_64 eng(123);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double beta = 1.0;
    const double eta_sd = 0.5;
    const int n = 100000;
    std::vector<double> x_obs(n);
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
        const double x_true = gauss(eng);
        const double eta = eta_sd * gauss(eng);
        const double e = gauss(eng);
        x_obs[i] = x_true + eta;
        u[i] = e - eta * beta;
    }
    const double oracle = testsupport::covariance(x_obs, u);
    const Vector c = theoretical_c(scalar_spec(MeasurementError{Vector::Constant(1, eta_sd)}));
    CHECK(c(0) == doctest::Approx(-0.25).epsilon(1e-14));
    // 4-sigma band for the covariance estimate at this n is about 0.016.
    CHECK(std::abs(oracle - c(0)) < 0.02);
}

TEST_CASE("simultaneity c against a hand-rolled reduced-form oracle") {
    std::mt19937_64 eng(321);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double alpha = 0.4;
    const double beta = 0.5;
    const int n = 100000;
    std::vector<double> x(n);
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
        const double v = gauss(eng);
        const double e = gauss(eng);
        x[i] = (v + alpha * e) / (1.0 - alpha * beta);
        u[i] = e;
    }
    const double oracle = testsupport::covariance(x, u);
    const Vector c = theoretical_c(scalar_spec(Simultaneity{alpha}, beta));
    CHECK(c(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(oracle - 0.5) < 0.02);
}

TEST_CASE("sample_c basics") {
    SUBCASE("zero error gives a zero vector") {
        const DgpSpec spec = two_dim_spec(Exogenous{});
        Sample s = generate_sample(spec, 50, 1);
        s.u.setZero();
        s.y = s.x * spec.beta;
        CHECK(sample_c(s).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("exogenous sample covariance is near zero at large n") {
        const Sample s = generate_sample(two_dim_spec(Exogenous{}), 100000, 5);
        CHECK(sample_c(s).cwiseAbs().maxCoeff() < 0.02);
    }
    SUBCASE("linear correlation matches theoretical_c at large n") {
        const DgpSpec spec = scalar_spec(LinearErrorCorrelation{Vector::Constant(1, 0.5)});
        const Sample s = generate_sample(spec, 100000, 11);
        CHECK(std::abs(sample_c(s)(0) - 0.5) < 0.02);
    }
}

TEST_CASE("reconstruction identity holds for every mechanism") {
    for (const DgpSpec& spec : one_spec_per_mechanism()) {
        CAPTURE(mechanism_name(spec.mechanism));
        const Sample s = generate_sample(spec, 500, 2024);
        CHECK(reconstruction_error(spec, s) < 1e-10);
    }
}

TEST_CASE("mean sample_c agrees with theoretical_c within 4 MC standard errors") {
    const int reps = 200;
    const Index n = 2000;
    for (const DgpSpec& spec : one_spec_per_mechanism()) {
        CAPTURE(mechanism_name(spec.mechanism));
        const Vector c_expected = theoretical_c(spec);
        std::vector<std::vector<double>> draws(static_cast<std::size_t>(spec.p()));
        for (int r = 0; r < reps; ++r) {
            const Sample s = generate_sample(spec, n, derive_seed(515, static_cast<Seed>(r)));
            const Vector c_hat = sample_c(s);
            for (Index j = 0; j < spec.p(); ++j) draws[static_cast<std::size_t>(j)].push_back(c_hat(j));
        }
        for (Index j = 0; j < spec.p(); ++j) {
            const auto& d = draws[static_cast<std::size_t>(j)];
            const double se = testsupport::mc_se(d);
            CHECK(std::abs(testsupport::mean(d) - c_expected(j)) <= 4.0 * se);
        }
    }
}

TEST_CASE("simultaneity reduced form is internally consistent") {
    const double alpha = 0.4;
    const DgpSpec spec = scalar_spec(Simultaneity{alpha}, 0.5);
    const Sample s = generate_sample(spec, 2000, 99);
    // Structural x equation: x = alpha*y + v must hold row by row.
    const Vector structural = s.x - alpha * s.y - s.structural_v;
    CHECK(structural.cwiseAbs().maxCoeff() < 1e-12);

    // Empirical Cov(x, u) near alpha * sigma_u^2 / (1 - alpha*beta).
    std::vector<double> covs;
    for (int r = 0; r < 200; ++r) {
        const Sample si = generate_sample(spec, 2000, derive_seed(77, static_cast<Seed>(r)));
        covs.push_back(sample_c(si)(0));
    }
    const double se = testsupport::mc_se(covs);
    CHECK(std::abs(testsupport::mean(covs) - 0.5) <= 4.0 * se);
}

TEST_CASE("invalid specs are rejected") {
    SUBCASE("indefinite x_cov") {
        DgpSpec spec = two_dim_spec(Exogenous{});
        spec.x_cov << 1.0, 2.0, 2.0, 1.0;
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    }
    SUBCASE("asymmetric x_cov") {
        DgpSpec spec = two_dim_spec(Exogenous{});
        spec.x_cov(0, 1) = 0.30001;
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    }
    SUBCASE("non-positive noise") {
        DgpSpec spec = two_dim_spec(Exogenous{});
        spec.noise_sd = 0.0;
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    }
    SUBCASE("gamma length mismatch") {
        CHECK_THROWS_AS(two_dim_spec(LinearErrorCorrelation{Vector::Constant(3, 0.1)}).validate(),
                        InvalidSpec);
    }
    SUBCASE("loading makes the joint covariance indefinite") {
        CHECK_THROWS_AS(
            scalar_spec(OmittedVariable{0.5, Vector::Constant(1, 1.2)}).validate(), InvalidSpec);
    }
    SUBCASE("negative eta_sd") {
        CHECK_THROWS_AS(scalar_spec(MeasurementError{Vector::Constant(1, -0.1)}).validate(),
                        InvalidSpec);
    }
    SUBCASE("unstable feedback") {
        CHECK_THROWS_AS(scalar_spec(Simultaneity{0.8}, 1.25).validate(), InvalidSpec);
    }
    SUBCASE("simultaneity needs p = 1") {
        CHECK_THROWS_AS(two_dim_spec(Simultaneity{0.1}).validate(), InvalidSpec);
    }
    SUBCASE("sample too small") {
        CHECK_THROWS_AS(generate_sample(two_dim_spec(Exogenous{}), 2, 1), SampleTooSmall);
    }
}

TEST_CASE("observed design covariance per mechanism") {
    const DgpSpec exo = two_dim_spec(Exogenous{});
    CHECK((observed_x_cov(exo).array() == exo.x_cov.array()).all());
    const Matrix me = observed_x_cov(scalar_spec(MeasurementError{Vector::Constant(1, 0.5)}));
    CHECK(me(0, 0) == doctest::Approx(1.25).epsilon(1e-14));
    const Matrix sim = observed_x_cov(scalar_spec(Simultaneity{0.4}, 0.5));
    CHECK(sim(0, 0) == doctest::Approx((1.0 + 0.16) / 0.64).epsilon(1e-14));
}

} // TEST_SUITE
