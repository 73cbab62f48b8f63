#include "endodiff/eventsplit.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace endodiff {

std::pair<Segment, Segment> split_at_event(const TimeSeriesDataset& data, const SplitSpec& spec) {
    const Index t = data.rows();
    const Index p = data.cols();
    if (data.y.size() != t) throw ShapeMismatch("x rows and y length must agree");
    if (!data.labels.empty() && static_cast<Index>(data.labels.size()) != p) {
        throw ShapeMismatch("labels length must equal regressor count");
    }
    if (spec.event_index < 1 || spec.event_index > t - 1) {
        std::ostringstream os;
        os << "event_index " << spec.event_index << " outside [1, " << t - 1 << "]";
        throw IndexOutOfRange(os.str());
    }
    if (spec.exclusion_window < 0) throw IndexOutOfRange("exclusion_window must be >= 0");

    const Index before_end = std::max<Index>(0, spec.event_index - spec.exclusion_window);
    const Index after_begin = std::min<Index>(t, spec.event_index + spec.exclusion_window);
    const Index n_before = before_end;
    const Index n_after = t - after_begin;
    if (n_before < p + 1 || n_after < p + 1) {
        std::ostringstream os;
        os << "segments of " << n_before << " and " << n_after << " rows cannot identify " << p
           << " coefficients (need >= " << p + 1 << " each)";
        throw WindowTooLarge(os.str());
    }

    Segment before{data.x.topRows(n_before), data.y.head(n_before)};
    Segment after{data.x.bottomRows(n_after), data.y.tail(n_after)};
    return {std::move(before), std::move(after)};
}

ComparativeStudy comparative_study(const TimeSeriesDataset& data, const SplitSpec& spec) {
    const auto [before, after] = split_at_event(data, spec);

    ComparativeStudy study;
    study.before_fit = ols_fit(before.x, before.y);
    study.after_fit = ols_fit(after.x, after.y);
    study.diff = diff_estimator(study.before_fit, study.after_fit);

    const Matrix gram_inv_b =
        static_cast<double>(before.x.rows()) * DesignFactorization(before.x).xtx_inverse();
    const Matrix gram_inv_a =
        static_cast<double>(after.x.rows()) * DesignFactorization(after.x).xtx_inverse();
    study.gram_inverse_discrepancy = (gram_inv_b - gram_inv_a).cwiseAbs().maxCoeff();
    return study;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_cell(std::string_view cell, const std::string& path, std::size_t line_no,
                  const std::string& column) {
    const std::string_view trimmed = trim(cell);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size()) {
        std::ostringstream os;
        os << path << ":" << line_no << ": non-numeric cell '" << std::string(trimmed)
           << "' in column '" << column << "'";
        throw ParseError(os.str());
    }
    return value;
}

} // namespace

TimeSeriesDataset read_csv_dataset(const std::string& path, const std::string& response_column) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(file, line)) throw ParseError(path + ":1: empty file, expected a header line");

    std::vector<std::string> header;
    for (const auto& cell : split_line(line)) header.emplace_back(trim(cell));
    Index response_idx = -1;
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == response_column) {
            if (response_idx >= 0) {
                throw ParseError(path + ":1: response column '" + response_column + "' appears twice");
            }
            response_idx = static_cast<Index>(j);
        } else {
            labels.push_back(header[j]);
        }
    }
    if (response_idx < 0) {
        throw ParseError(path + ":1: response column '" + response_column + "' not found");
    }
    const Index p = static_cast<Index>(header.size()) - 1;
    if (p < 1) throw ParseError(path + ":1: need at least one regressor column");

    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream os;
            os << path << ":" << line_no << ": expected " << header.size() << " cells, got "
               << cells.size();
            throw ParseError(os.str());
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const double v = parse_cell(cells[j], path, line_no, header[j]);
            if (static_cast<Index>(j) == response_idx) {
                ys.push_back(v);
            } else {
                xs.push_back(v);
            }
        }
    }

    const Index t = static_cast<Index>(ys.size());
    if (t < 2 * (p + 1)) {
        std::ostringstream os;
        os << path << ": only " << t << " data rows; a before/after study of " << p
           << " regressors needs at least " << 2 * (p + 1);
        throw ParseError(os.str());
    }

    TimeSeriesDataset data;
    data.labels = std::move(labels);
    data.y = Eigen::Map<const Vector>(ys.data(), t);
    data.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        xs.data(), t, p);
    return data;
}

} // namespace endodiff
