#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>

#include "endodiff/errors.hpp"

namespace endodiff {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using Seed = std::uint64_t;

// ---------------------------------------------------------------------------
// Endogeneity mechanisms
//
// All primitive shocks are mean-zero Gaussian. Each mechanism defines how the
// regression error u relates to the observed design, and therefore the
// population covariance vector c = Cov(x_j, u).
// ---------------------------------------------------------------------------

/// u = e. Control case: c = 0.
struct Exogenous {};

/// u = gamma' x + e. Direct regressor/error correlation: c = x_cov * gamma.
struct LinearErrorCorrelation {
    Vector gamma;
};

/// A standard-normal confounder w with Cov(x, w) = loading is omitted from
/// the model; u = delta * w + e, so c = delta * loading. (x, w) are drawn
/// jointly Gaussian with block covariance [[x_cov, loading], [loading', 1]].
struct OmittedVariable {
    double delta = 0.0;
    Vector loading;
};

/// Classical additive measurement error: observed X = X_true + eta with
/// eta_j ~ N(0, eta_sd_j^2) independent. Against the observed design the
/// error is u = e - eta' beta, so c = -diag(eta_sd^2) * beta.
struct MeasurementError {
    Vector eta_sd;
};

/// Scalar feedback x = alpha * y + v (p = 1, v ~ N(0, x_cov)). The observed
/// regressor solves the reduced form x = (v + alpha e) / (1 - alpha beta);
/// c = alpha * noise_sd^2 / (1 - alpha beta).
struct Simultaneity {
    double alpha = 0.0;
};

using EndogeneityMechanism =
    std::variant<Exogenous, LinearErrorCorrelation, OmittedVariable, MeasurementError, Simultaneity>;

/// Human-readable mechanism tag ("exogenous", "simultaneity", ...), the same
/// strings the configuration format uses.
std::string mechanism_name(const EndogeneityMechanism& mechanism);

// ---------------------------------------------------------------------------
// DgpSpec
// ---------------------------------------------------------------------------

/// Full generative description of one system.
///
/// x_cov is the covariance of the latent regressor shock: the observed design
/// covariance equals it except under MeasurementError (adds diag(eta_sd^2))
/// and Simultaneity (where x_cov is Var(v) and the reduced form rescales it).
struct DgpSpec {
    Vector beta;                 // true coefficients, length p
    Matrix x_cov;                // p x p, symmetric positive definite
    double noise_sd = 1.0;       // sd of the idiosyncratic disturbance e
    EndogeneityMechanism mechanism = Exogenous{};

    Index p() const { return beta.size(); }

    /// Throws InvalidSpec naming the offending field.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Sample
// ---------------------------------------------------------------------------

/// One realized dataset. y = x * beta + u holds exactly by construction,
/// where x is the OBSERVED design and u the error the estimator faces.
/// Mechanism internals are kept for oracle computations (e.g. using the
/// structural shock v as an instrument); they are empty when not applicable.
struct Sample {
    Matrix x;                    // n x p observed design
    Vector y;                    // length n
    Vector u;                    // length n, latent error against x
    Vector omitted_w;            // OmittedVariable: the confounder draws
    Matrix measurement_noise;    // MeasurementError: eta, n x p
    Vector structural_v;         // Simultaneity: shock in the x equation
    Index n = 0;
    Seed seed = 0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Draws n i.i.d. observations from the spec. Pure function of
/// (spec, n, seed): identical inputs give bit-identical samples.
///
/// Throws InvalidSpec, SampleTooSmall (n <= p).
Sample generate_sample(const DgpSpec& spec, Index n, Seed seed);

/// Closed-form population covariance Cov(x_j, u) of the observed design with
/// the error, per mechanism. Throws InvalidSpec.
Vector theoretical_c(const DgpSpec& spec);

/// Empirical covariance between each design column and the latent error
/// (divisor n-1). Converges to theoretical_c as n grows.
Vector sample_c(const Sample& sample);

/// Population covariance of the OBSERVED design (includes measurement noise
/// and the simultaneity reduced-form scaling). This is the Gram limit
/// X'X / n -> observed_x_cov used by asymptotic bias terms.
Matrix observed_x_cov(const DgpSpec& spec);

} // namespace endodiff
