#pragma once

#include <Eigen/Dense>

#include "endodiff/dgp.hpp"
#include "endodiff/errors.hpp"

namespace endodiff {

/// Condition-number gate shared by every least-squares solve.
inline constexpr double kConditionLimit = 1e12;

/// Reciprocal first-stage strength below which an instrument set is flagged
/// weak (reported, never fatal).
inline constexpr double kWeakInstrumentThreshold = 1e-8;

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct FitResult {
    Vector beta_hat;
    Vector residuals;
    double sigma2_hat = 0.0;     // ||residuals||^2 / (n - p); 0 when n == p
    Matrix cov_hat;              // sigma2_hat * (X'X)^{-1} of the solved design
    double condition_number = 0.0;
    Index n = 0;
    Index p = 0;
    // 2SLS diagnostics: sigma_min(fitted design) / sigma_max(X). NaN for OLS.
    double first_stage_strength = std::numeric_limits<double>::quiet_NaN();
    bool weak_instrument = false;
};

struct DiffResult {
    Vector diff;      // beta_hat_a - beta_hat_b
    Matrix cov;       // cov_hat_a + cov_hat_b (independent samples)
    Vector z_scores;  // diff / sqrt(diag(cov)), 0 where both are zero
};

// ---------------------------------------------------------------------------
// Shared QR machinery
// ---------------------------------------------------------------------------

/// Householder QR of a design matrix with a condition gate. (X'X)^{-1} and
/// projections come out of the factorization; X'X is never inverted directly.
class DesignFactorization {
public:
    /// Throws ShapeMismatch (n < p) or RankDeficient (condition > 1e12).
    explicit DesignFactorization(const Matrix& x);

    /// Least-squares solution argmin_b ||rhs - X b||, i.e. (X'X)^{-1} X' rhs.
    Vector solve(const Vector& rhs) const;

    /// (X'X)^{-1} via the triangular factor.
    Matrix xtx_inverse() const;

    double condition_number() const { return condition_; }
    double sigma_min() const { return sigma_min_; }
    double sigma_max() const { return sigma_max_; }
    Index rows() const { return n_; }
    Index cols() const { return p_; }

private:
    Eigen::HouseholderQR<Matrix> qr_;
    Matrix r_;  // p x p upper-triangular factor
    Index n_ = 0;
    Index p_ = 0;
    double condition_ = 0.0;
    double sigma_min_ = 0.0;
    double sigma_max_ = 0.0;
};

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Ordinary least squares of y on x. Throws ShapeMismatch, RankDeficient.
FitResult ols_fit(const Matrix& x, const Vector& y);

/// Two-stage least squares with instrument matrix z (n x q, q >= p): project
/// x onto the column space of z, then OLS of y on the projection. Residuals
/// and sigma2_hat are structural (y - x * beta_hat). With q == p this equals
/// (Z'X)^{-1} Z'y; with z == x it reduces to ols_fit.
/// Throws ShapeMismatch, RankDeficient; weak instruments are flagged on the
/// result, not thrown.
FitResult tsls_fit(const Matrix& x, const Matrix& z, const Vector& y);

/// Difference estimator between two independently fitted systems.
/// Throws ShapeMismatch when the coefficient counts differ.
DiffResult diff_estimator(const FitResult& fit_b, const FitResult& fit_a);

} // namespace endodiff
