#include "ccp/eval.hpp"

#include "ccp/error.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace ccp::eval {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

using Wide = __int128;

Wide pairs(std::size_t n) { return static_cast<Wide>(n) * static_cast<Wide>(n - (n > 0 ? 1 : 0)) / 2; }

} // namespace

std::vector<int> segment_labels(std::size_t tau, std::size_t t0, std::size_t t_end) {
    require(t0 < tau && tau <= t_end, "segment_labels: tau must lie in (t0, t_end]");
    std::vector<int> labels(t_end - t0);
    for (std::size_t t = t0 + 1; t <= t_end; ++t) labels[t - t0 - 1] = t <= tau ? 0 : 1;
    return labels;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    require(a.size() == b.size(), "adjusted_rand_index: label vectors differ in length");
    require(a.size() >= 2, "adjusted_rand_index: need at least two points");

    std::map<std::pair<int, int>, std::size_t> cells;
    std::map<int, std::size_t> rows;
    std::map<int, std::size_t> cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++cells[{a[i], b[i]}];
        ++rows[a[i]];
        ++cols[b[i]];
    }
    Wide index = 0;
    for (const auto& [key, count] : cells) index += pairs(count);
    Wide sum_a = 0;
    for (const auto& [key, count] : rows) sum_a += pairs(count);
    Wide sum_b = 0;
    for (const auto& [key, count] : cols) sum_b += pairs(count);
    const Wide total = pairs(a.size());

    // (index - E) / (max - E) with E = sum_a sum_b / total, scaled by 2 total.
    const Wide numerator = 2 * (total * index - sum_a * sum_b);
    const Wide denominator = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if (denominator == 0) return 1.0;
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

std::size_t scored_estimate(const RunRecord& record, double q) {
    return record.p <= q ? record.tau_hat : record.t_total;
}

double record_ari(const RunRecord& record, double q) {
    require(record.truth.has_value(), "record_ari: record has no true change point");
    const auto truth = segment_labels(*record.truth, record.t0, record.t_total);
    const auto estimate = segment_labels(scored_estimate(record, q), record.t0, record.t_total);
    return adjusted_rand_index(truth, estimate);
}

std::vector<double> default_deltas() {
    constexpr std::size_t points = 101;
    std::vector<double> deltas(points);
    for (std::size_t i = 0; i < points; ++i) deltas[i] = 0.5 * static_cast<double>(i) / static_cast<double>(points - 1);
    return deltas;
}

std::vector<double> error_cdf(std::span<const RunRecord> records, std::span<const double> deltas, double q) {
    require(!records.empty(), "error_cdf: no records");
    std::vector<double> errors;
    errors.reserve(records.size());
    for (const auto& r : records) {
        require(r.truth.has_value(), "error_cdf: record without a true change point");
        require(r.t0 < r.t_total, "error_cdf: invalid window");
        const std::size_t estimate = scored_estimate(r, q);
        const std::size_t gap = estimate > *r.truth ? estimate - *r.truth : *r.truth - estimate;
        errors.push_back(static_cast<double>(gap) / static_cast<double>(r.t_total - r.t0));
    }
    std::vector<double> curve(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const auto hits = std::count_if(errors.begin(), errors.end(), [&](double e) { return e <= deltas[i]; });
        curve[i] = static_cast<double>(hits) / static_cast<double>(errors.size());
    }
    return curve;
}

double type1_rate(std::span<const RunRecord> records, double q) {
    require(!records.empty(), "type1_rate: no records");
    const auto rejected = std::count_if(records.begin(), records.end(), [&](const RunRecord& r) { return r.p <= q; });
    return static_cast<double>(rejected) / static_cast<double>(records.size());
}

} // namespace ccp::eval
