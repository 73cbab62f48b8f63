#include "endodiff/bias.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>
#include <vector>

#include "endodiff/parallel.hpp"
#include "endodiff/rng.hpp"

namespace endodiff {

namespace {

// Replication results stored by index, reduced serially afterwards, so the
// statistics do not depend on the worker count.
struct ReplicationTable {
    Matrix values;                 // reps x width, row i from sub-seed i
    std::vector<char> ok;          // 1 when replication i produced a fit

    explicit ReplicationTable(int reps, Index width)
        : values(Matrix::Zero(reps, width)), ok(static_cast<std::size_t>(reps), 0) {}
};

struct Summary {
    Vector mean;
    Vector mc_se;
    int used = 0;
    int skipped = 0;
};

Summary summarize(const ReplicationTable& table) {
    const Index width = table.values.cols();
    const int reps = static_cast<int>(table.values.rows());
    Summary s;
    s.mean = Vector::Zero(width);
    s.mc_se = Vector::Zero(width);
    for (int i = 0; i < reps; ++i) {
        if (!table.ok[static_cast<std::size_t>(i)]) continue;
        ++s.used;
        s.mean += table.values.row(i).transpose();
    }
    s.skipped = reps - s.used;
    if (s.used < 2) {
        throw RankDeficient("fewer than two usable replications");
    }
    s.mean /= static_cast<double>(s.used);
    for (int i = 0; i < reps; ++i) {
        if (!table.ok[static_cast<std::size_t>(i)]) continue;
        s.mc_se += (table.values.row(i).transpose() - s.mean).cwiseAbs2();
    }
    s.mc_se = (s.mc_se / static_cast<double>(s.used - 1) / static_cast<double>(s.used))
                  .cwiseSqrt();
    return s;
}

// One Monte Carlo pass over a system: OLS coefficients and the bias
// functional (X'X)^{-1} X'u from the same draws.
struct SideSummary {
    Summary beta;
    Summary bias;
    Vector asymptotic;
};

SideSummary run_side(const DgpSpec& spec, Index n, int reps, Seed seed) {
    spec.validate();
    if (reps < 2) throw InvalidSpec("reps must be at least 2");
    const Index p = spec.p();

    ReplicationTable beta_table(reps, p);
    ReplicationTable bias_table(reps, p);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t i) {
        const Sample sample = generate_sample(spec, n, derive_seed(seed, i));
        try {
            const DesignFactorization fac(sample.x);
            beta_table.values.row(i) = fac.solve(sample.y).transpose();
            bias_table.values.row(i) = fac.solve(sample.u).transpose();
            beta_table.ok[i] = 1;
            bias_table.ok[i] = 1;
        } catch (const RankDeficient&) {
            // Degenerate draw; counted and excluded from the means.
        }
    });

    SideSummary side;
    side.beta = summarize(beta_table);
    side.bias = summarize(bias_table);
    const Matrix obs_cov = observed_x_cov(spec);
    side.asymptotic = Eigen::LLT<Matrix>(obs_cov).solve(theoretical_c(spec));
    return side;
}

BiasTerm to_bias_term(const SideSummary& side) {
    BiasTerm term;
    term.finite_sample = side.bias.mean;
    term.asymptotic = side.asymptotic;
    term.mc_se = side.bias.mc_se;
    term.reps_used = side.bias.used;
    term.skipped = side.bias.skipped;
    return term;
}

Vector combined_se(const Vector& a, const Vector& b) {
    return (a.cwiseAbs2() + b.cwiseAbs2()).cwiseSqrt();
}

} // namespace

void ScenarioPair::validate() const {
    spec_b.validate();
    spec_a.validate();
    if (spec_b.p() != spec_a.p()) {
        std::ostringstream os;
        os << "sides have different coefficient counts: " << spec_b.p() << " vs " << spec_a.p();
        throw IncompatiblePair(os.str());
    }
    if (reps < 2) throw InvalidSpec("reps must be at least 2");
    if (n_b <= spec_b.p() || n_a <= spec_a.p()) {
        throw SampleTooSmall("per-side sample sizes must exceed p");
    }
}

BiasTerm bias_term(const DgpSpec& spec, Index n, int reps, Seed seed) {
    return to_bias_term(run_side(spec, n, reps, seed));
}

std::pair<Vector, Vector> mc_expectation_beta(const DgpSpec& spec, Index n, int reps, Seed seed) {
    const SideSummary side = run_side(spec, n, reps, seed);
    return {side.beta.mean, side.beta.mc_se};
}

PropositionReport proposition_check(const ScenarioPair& pair, double tol_multiplier) {
    pair.validate();
    if (!(tol_multiplier > 0.0)) throw InvalidSpec("tol_multiplier must be positive");

    const SideSummary side_b = run_side(pair.spec_b, pair.n_b, pair.reps, derive_seed(pair.master_seed, 0));
    const SideSummary side_a = run_side(pair.spec_a, pair.n_a, pair.reps, derive_seed(pair.master_seed, 1));

    PropositionReport report;
    report.tol_multiplier = tol_multiplier;
    report.mean_beta_b = side_b.beta.mean;
    report.mean_beta_a = side_a.beta.mean;
    report.mc_se_beta_b = side_b.beta.mc_se;
    report.mc_se_beta_a = side_a.beta.mc_se;
    report.true_diff = pair.spec_a.beta - pair.spec_b.beta;
    report.measured_diff = side_a.beta.mean - side_b.beta.mean;
    report.mc_se_diff = combined_se(side_a.beta.mc_se, side_b.beta.mc_se);
    report.bias_b = to_bias_term(side_b);
    report.bias_a = to_bias_term(side_a);
    report.criterion_gap = side_a.bias.mean - side_b.bias.mean;
    report.criterion_gap_mc_se = combined_se(side_a.bias.mc_se, side_b.bias.mc_se);
    report.asymptotic_gap = side_a.asymptotic - side_b.asymptotic;
    report.identity_residual = report.measured_diff - report.true_diff - report.criterion_gap;

    const Vector residual_se = combined_se(report.mc_se_diff, report.criterion_gap_mc_se);
    report.identity_holds = true;
    for (Index j = 0; j < report.identity_residual.size(); ++j) {
        if (std::abs(report.identity_residual(j)) > tol_multiplier * residual_se(j)) {
            report.identity_holds = false;
        }
    }
    report.mc_valid = report.bias_b.acceptable() && report.bias_a.acceptable();
    const double gap_norm = report.criterion_gap.cwiseAbs().maxCoeff();
    const double gap_tol = tol_multiplier * report.criterion_gap_mc_se.maxCoeff();
    report.verdict = gap_norm <= gap_tol ? CriterionVerdict::holds : CriterionVerdict::violated;
    return report;
}

GapEstimate criterion_gap(const ScenarioPair& pair) {
    pair.validate();
    const SideSummary side_b = run_side(pair.spec_b, pair.n_b, pair.reps, derive_seed(pair.master_seed, 0));
    const SideSummary side_a = run_side(pair.spec_a, pair.n_a, pair.reps, derive_seed(pair.master_seed, 1));
    GapEstimate gap;
    gap.gap = side_a.bias.mean - side_b.bias.mean;
    gap.mc_se = combined_se(side_a.bias.mc_se, side_b.bias.mc_se);
    gap.asymptotic = side_a.asymptotic - side_b.asymptotic;
    return gap;
}

FactorizationReport factorization_check(const DgpSpec& spec, Index n, int reps, Seed seed) {
    spec.validate();
    if (reps < 2) throw InvalidSpec("reps must be at least 2");
    const Index p = spec.p();

    ReplicationTable joint_table(reps, p);      // (X'X)^{-1} c_hat
    ReplicationTable c_table(reps, p);          // c_hat
    ReplicationTable gram_table(reps, p * p);   // (X'X)^{-1}, row-flattened
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t i) {
        const Sample sample = generate_sample(spec, n, derive_seed(seed, i));
        try {
            const DesignFactorization fac(sample.x);
            const Matrix gram_inv = fac.xtx_inverse();
            const Vector c_hat = sample_c(sample);
            joint_table.values.row(i) = (gram_inv * c_hat).transpose();
            c_table.values.row(i) = c_hat.transpose();
            gram_table.values.row(i) =
                Eigen::Map<const Vector>(gram_inv.data(), p * p).transpose();
            joint_table.ok[i] = 1;
            c_table.ok[i] = 1;
            gram_table.ok[i] = 1;
        } catch (const RankDeficient&) {
        }
    });

    const Summary joint = summarize(joint_table);
    const Summary c_mean = summarize(c_table);
    const Summary gram = summarize(gram_table);

    FactorizationReport report;
    report.joint = joint.mean;
    report.mc_se = joint.mc_se;
    const Matrix mean_gram_inv = Eigen::Map<const Matrix>(gram.mean.data(), p, p);
    report.product = mean_gram_inv * c_mean.mean;
    report.gap = report.joint - report.product;
    report.reps_used = joint.used;
    report.skipped = joint.skipped;
    return report;
}

} // namespace endodiff
