#include "endodiff/estimate.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>

namespace endodiff {

DesignFactorization::DesignFactorization(const Matrix& x)
    : qr_(x), n_(x.rows()), p_(x.cols()) {
    if (n_ < p_ || p_ < 1) {
        std::ostringstream os;
        os << "design must have at least as many rows as columns, got " << n_ << "x" << p_;
        throw ShapeMismatch(os.str());
    }
    r_ = qr_.matrixQR().topRows(p_).triangularView<Eigen::Upper>();
    // Singular values of X equal those of its triangular factor.
    Eigen::JacobiSVD<Matrix> svd(r_);
    sigma_max_ = svd.singularValues()(0);
    sigma_min_ = svd.singularValues()(p_ - 1);
    condition_ = sigma_min_ > 0.0 ? sigma_max_ / sigma_min_
                                  : std::numeric_limits<double>::infinity();
    if (!(condition_ <= kConditionLimit)) {
        std::ostringstream os;
        os << "design condition number " << condition_ << " exceeds " << kConditionLimit;
        throw RankDeficient(os.str());
    }
}

Vector DesignFactorization::solve(const Vector& rhs) const {
    if (rhs.size() != n_) throw ShapeMismatch("right-hand side length must equal design rows");
    return qr_.solve(rhs);
}

Matrix DesignFactorization::xtx_inverse() const {
    const Matrix r_inv =
        r_.triangularView<Eigen::Upper>().solve(Matrix::Identity(p_, p_));
    Matrix inv = r_inv * r_inv.transpose();
    return (inv + inv.transpose()) / 2.0;
}

namespace {

FitResult finish_fit(const DesignFactorization& fac, const Matrix& x, const Vector& y,
                     const Vector& beta) {
    FitResult fit;
    fit.beta_hat = beta;
    fit.residuals = y - x * beta;
    fit.n = x.rows();
    fit.p = x.cols();
    fit.sigma2_hat = fit.n > fit.p
                         ? fit.residuals.squaredNorm() / static_cast<double>(fit.n - fit.p)
                         : 0.0;
    fit.cov_hat = fit.sigma2_hat * fac.xtx_inverse();
    fit.condition_number = fac.condition_number();
    return fit;
}

} // namespace

FitResult ols_fit(const Matrix& x, const Vector& y) {
    if (y.size() != x.rows()) throw ShapeMismatch("y length must equal design rows");
    DesignFactorization fac(x);
    return finish_fit(fac, x, y, fac.solve(y));
}

FitResult tsls_fit(const Matrix& x, const Matrix& z, const Vector& y) {
    const Index n = x.rows();
    const Index p = x.cols();
    const Index q = z.cols();
    if (y.size() != n || z.rows() != n) throw ShapeMismatch("x, z, y row counts must agree");
    if (q < p) throw ShapeMismatch("need at least as many instruments as regressors");
    if (n < q) throw ShapeMismatch("need at least as many rows as instruments");

    // First stage: fitted design = P_z X via the instrument QR.
    Eigen::HouseholderQR<Matrix> zqr(z);
    {
        const Matrix rz = zqr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<Matrix> svd(rz);
        const double smin = svd.singularValues()(q - 1);
        const double cond = smin > 0.0 ? svd.singularValues()(0) / smin
                                       : std::numeric_limits<double>::infinity();
        if (!(cond <= kConditionLimit)) throw RankDeficient("instrument matrix is rank deficient");
    }
    Matrix qtx = zqr.householderQ().transpose() * x;
    qtx.bottomRows(n - q).setZero();
    const Matrix x_hat = zqr.householderQ() * qtx;

    DesignFactorization fac(x_hat);
    FitResult fit = finish_fit(fac, x, y, fac.solve(y));

    // Weak-instrument diagnostic: weakest direction of the fitted design
    // relative to the scale of the raw design.
    Eigen::SelfAdjointEigenSolver<Matrix> gram(x.transpose() * x);
    const double x_sigma_max = std::sqrt(std::max(0.0, gram.eigenvalues().maxCoeff()));
    fit.first_stage_strength =
        x_sigma_max > 0.0 ? fac.sigma_min() / x_sigma_max : 0.0;
    fit.weak_instrument = fit.first_stage_strength < kWeakInstrumentThreshold;
    return fit;
}

DiffResult diff_estimator(const FitResult& fit_b, const FitResult& fit_a) {
    if (fit_b.beta_hat.size() != fit_a.beta_hat.size()) {
        throw ShapeMismatch("fits have different coefficient counts");
    }
    DiffResult out;
    out.diff = fit_a.beta_hat - fit_b.beta_hat;
    out.cov = fit_a.cov_hat + fit_b.cov_hat;
    out.z_scores = Vector::Zero(out.diff.size());
    for (Index j = 0; j < out.diff.size(); ++j) {
        const double var = out.cov(j, j);
        if (var > 0.0) {
            out.z_scores(j) = out.diff(j) / std::sqrt(var);
        } else if (out.diff(j) != 0.0) {
            out.z_scores(j) = std::numeric_limits<double>::infinity() * (out.diff(j) > 0 ? 1 : -1);
        }
    }
    return out;
}

} // namespace endodiff
