#include "endodiff/dgp.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>
#include <sstream>

namespace endodiff {

namespace {

// Cholesky factor of a covariance matrix; LLT failure defines
// "not positive definite".
Matrix cholesky_or_throw(const Matrix& cov, const std::string& what) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw InvalidSpec(what + " is not positive definite");
    }
    return llt.matrixL();
}

void check_symmetric(const Matrix& cov, const std::string& what) {
    const double scale = cov.cwiseAbs().maxCoeff();
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1.0)) {
        throw InvalidSpec(what + " is not symmetric");
    }
}

struct Drawer {
    std::mt19937_64 engine;
    std::normal_distribution<double> gauss{0.0, 1.0};

    explicit Drawer(Seed seed) : engine(seed) {}

    // Row-major fill order so the draw sequence is part of the contract.
    Matrix matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = gauss(engine);
        return m;
    }

    Vector vector(Index rows) {
        Vector v(rows);
        for (Index i = 0; i < rows; ++i) v(i) = gauss(engine);
        return v;
    }
};

double simultaneity_denominator(const DgpSpec& spec, double alpha) {
    return 1.0 - alpha * spec.beta(0);
}

} // namespace

std::string mechanism_name(const EndogeneityMechanism& mechanism) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exogenous>) return "exogenous";
            else if constexpr (std::is_same_v<T, LinearErrorCorrelation>) return "linear_error_correlation";
            else if constexpr (std::is_same_v<T, OmittedVariable>) return "omitted_variable";
            else if constexpr (std::is_same_v<T, MeasurementError>) return "measurement_error";
            else return "simultaneity";
        },
        mechanism);
}

void DgpSpec::validate() const {
    const Index dim = p();
    if (dim < 1) throw InvalidSpec("beta must have at least one coefficient");
    if (x_cov.rows() != dim || x_cov.cols() != dim) {
        std::ostringstream os;
        os << "x_cov must be " << dim << "x" << dim << ", got " << x_cov.rows() << "x" << x_cov.cols();
        throw InvalidSpec(os.str());
    }
    check_symmetric(x_cov, "x_cov");
    cholesky_or_throw(x_cov, "x_cov");
    if (!(noise_sd > 0.0)) throw InvalidSpec("noise_sd must be positive");

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearErrorCorrelation>) {
                if (m.gamma.size() != dim) throw InvalidSpec("mechanism.gamma length must equal p");
            } else if constexpr (std::is_same_v<T, OmittedVariable>) {
                if (m.loading.size() != dim) throw InvalidSpec("mechanism.loading length must equal p");
                Matrix joint(dim + 1, dim + 1);
                joint.topLeftCorner(dim, dim) = x_cov;
                joint.topRightCorner(dim, 1) = m.loading;
                joint.bottomLeftCorner(1, dim) = m.loading.transpose();
                joint(dim, dim) = 1.0;
                cholesky_or_throw(joint, "joint (x, w) covariance");
            } else if constexpr (std::is_same_v<T, MeasurementError>) {
                if (m.eta_sd.size() != dim) throw InvalidSpec("mechanism.eta_sd length must equal p");
                if ((m.eta_sd.array() < 0.0).any()) throw InvalidSpec("mechanism.eta_sd entries must be >= 0");
            } else if constexpr (std::is_same_v<T, Simultaneity>) {
                if (dim != 1) throw InvalidSpec("simultaneity requires p = 1");
                if (!(std::abs(m.alpha * beta(0)) < 1.0)) {
                    throw InvalidSpec("simultaneity requires |alpha * beta| < 1");
                }
            }
        },
        mechanism);
}

Sample generate_sample(const DgpSpec& spec, Index n, Seed seed) {
    spec.validate();
    const Index p = spec.p();
    if (n <= p) {
        std::ostringstream os;
        os << "sample size " << n << " must exceed p = " << p;
        throw SampleTooSmall(os.str());
    }

    Drawer draw(seed);
    Sample sample;
    sample.n = n;
    sample.seed = seed;

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exogenous>) {
                const Matrix chol = cholesky_or_throw(spec.x_cov, "x_cov");
                sample.x = draw.matrix(n, p) * chol.transpose();
                sample.u = spec.noise_sd * draw.vector(n);
            } else if constexpr (std::is_same_v<T, LinearErrorCorrelation>) {
                const Matrix chol = cholesky_or_throw(spec.x_cov, "x_cov");
                sample.x = draw.matrix(n, p) * chol.transpose();
                sample.u = sample.x * m.gamma + spec.noise_sd * draw.vector(n);
            } else if constexpr (std::is_same_v<T, OmittedVariable>) {
                Matrix joint(p + 1, p + 1);
                joint.topLeftCorner(p, p) = spec.x_cov;
                joint.topRightCorner(p, 1) = m.loading;
                joint.bottomLeftCorner(1, p) = m.loading.transpose();
                joint(p, p) = 1.0;
                const Matrix chol = cholesky_or_throw(joint, "joint (x, w) covariance");
                const Matrix xw = draw.matrix(n, p + 1) * chol.transpose();
                sample.x = xw.leftCols(p);
                sample.omitted_w = xw.col(p);
                sample.u = m.delta * sample.omitted_w + spec.noise_sd * draw.vector(n);
            } else if constexpr (std::is_same_v<T, MeasurementError>) {
                const Matrix chol = cholesky_or_throw(spec.x_cov, "x_cov");
                const Matrix x_true = draw.matrix(n, p) * chol.transpose();
                sample.measurement_noise =
                    draw.matrix(n, p) * m.eta_sd.asDiagonal();
                const Vector e = spec.noise_sd * draw.vector(n);
                sample.x = x_true + sample.measurement_noise;
                sample.u = e - sample.measurement_noise * spec.beta;
            } else { // Simultaneity
                const double sd_v = std::sqrt(spec.x_cov(0, 0));
                sample.structural_v = sd_v * draw.vector(n);
                const Vector e = spec.noise_sd * draw.vector(n);
                const double denom = simultaneity_denominator(spec, m.alpha);
                sample.x = (sample.structural_v + m.alpha * e) / denom;
                sample.u = e;
            }
        },
        spec.mechanism);

    sample.y = sample.x * spec.beta + sample.u;
    return sample;
}

Vector theoretical_c(const DgpSpec& spec) {
    spec.validate();
    return std::visit(
        [&](const auto& m) -> Vector {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exogenous>) {
                return Vector::Zero(spec.p());
            } else if constexpr (std::is_same_v<T, LinearErrorCorrelation>) {
                return spec.x_cov * m.gamma;
            } else if constexpr (std::is_same_v<T, OmittedVariable>) {
                return m.delta * m.loading;
            } else if constexpr (std::is_same_v<T, MeasurementError>) {
                return -(m.eta_sd.array().square() * spec.beta.array()).matrix();
            } else { // Simultaneity
                Vector c(1);
                c(0) = m.alpha * spec.noise_sd * spec.noise_sd /
                       simultaneity_denominator(spec, m.alpha);
                return c;
            }
        },
        spec.mechanism);
}

Vector sample_c(const Sample& sample) {
    const Index n = sample.x.rows();
    if (sample.y.size() != n || sample.u.size() != n || sample.n != n) {
        throw ShapeMismatch("sample rows are inconsistent");
    }
    if (n < 2) throw ShapeMismatch("sample covariance needs at least two rows");
    const Matrix centered_x = sample.x.rowwise() - sample.x.colwise().mean();
    const Vector centered_u = sample.u.array() - sample.u.mean();
    return centered_x.transpose() * centered_u / static_cast<double>(n - 1);
}

Matrix observed_x_cov(const DgpSpec& spec) {
    spec.validate();
    return std::visit(
        [&](const auto& m) -> Matrix {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MeasurementError>) {
                Matrix cov = spec.x_cov;
                cov.diagonal() += m.eta_sd.array().square().matrix();
                return cov;
            } else if constexpr (std::is_same_v<T, Simultaneity>) {
                const double denom = simultaneity_denominator(spec, m.alpha);
                Matrix cov(1, 1);
                cov(0, 0) = (spec.x_cov(0, 0) +
                             m.alpha * m.alpha * spec.noise_sd * spec.noise_sd) /
                            (denom * denom);
                return cov;
            } else {
                return spec.x_cov;
            }
        },
        spec.mechanism);
}

} // namespace endodiff
