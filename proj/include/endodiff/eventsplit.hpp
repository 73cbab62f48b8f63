#pragma once

#include <string>
#include <utility>
#include <vector>

#include "endodiff/dgp.hpp"
#include "endodiff/estimate.hpp"

namespace endodiff {

/// A time-ordered dataset of T observations on p regressors.
struct TimeSeriesDataset {
    Matrix x;                          // T x p
    Vector y;                          // length T
    std::vector<std::string> labels;   // regressor names, optional (empty or length p)

    Index rows() const { return x.rows(); }
    Index cols() const { return x.cols(); }
};

/// Where to cut the series. event_index is the first row of the AFTER
/// period; rows [event_index - g, event_index + g) are dropped.
struct SplitSpec {
    Index event_index = 0;
    Index exclusion_window = 0;
};

struct Segment {
    Matrix x;
    Vector y;
};

/// Design/response pair for each side plus the comparative estimate and a
/// design-stability diagnostic. The diagnostic is the max-abs entry of
/// n_B (X_B'X_B)^{-1} - n_A (X_A'X_A)^{-1}, i.e. the difference between the
/// segments' scaled inverse Gram matrices — the factor of the equality
/// criterion that real data can estimate (the error-covariance factor is
/// not identifiable because OLS residuals are orthogonal to X).
struct ComparativeStudy {
    FitResult before_fit;
    FitResult after_fit;
    DiffResult diff;
    double gram_inverse_discrepancy = 0.0;
};

/// Splits rows into before = [0, event_index - g) and after =
/// [event_index + g, T), preserving order. Throws IndexOutOfRange when
/// event_index is outside [1, T-1], WindowTooLarge when a segment would
/// retain fewer than p+1 rows, ShapeMismatch on inconsistent rows.
std::pair<Segment, Segment> split_at_event(const TimeSeriesDataset& data, const SplitSpec& spec);

/// OLS on each segment, then the difference estimator. Fit and diff results
/// are exactly what ols_fit / diff_estimator return on the split segments.
ComparativeStudy comparative_study(const TimeSeriesDataset& data, const SplitSpec& spec);

/// Reads a dataset from CSV: first line holds column names, the column named
/// `response_column` becomes y, every other column must be numeric and
/// becomes a regressor (in file order). '.' is the decimal separator. Throws
/// ParseError with "path:line:" context on malformed content, IoError when
/// the file cannot be opened.
TimeSeriesDataset read_csv_dataset(const std::string& path, const std::string& response_column);

} // namespace endodiff
