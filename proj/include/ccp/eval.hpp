#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ccp::eval {

inline constexpr double kDefaultQ = 0.05;

/// Outcome of one detection run on labeled data.
struct RunRecord {
    std::string scenario_id;
    std::size_t rep = 0;
    double eps_train = 0.0;
    std::optional<std::size_t> truth;
    std::size_t tau_hat = 0;
    double k = 0.0;
    double p = 1.0;
    std::size_t t0 = 0;      // T_wash + T_train
    std::size_t t_total = 0; // T
    std::size_t block_length = 0;
    std::size_t n = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
};

/// Labels for t in (t0, t_end]: 0 up to tau, 1 afterwards. tau = t_end
/// yields a single segment.
std::vector<int> segment_labels(std::size_t tau, std::size_t t0, std::size_t t_end);

/// Hubert-Arabie adjusted Rand index. Two single-cluster partitions score 1.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Change point estimate scored for a record: tau_hat when p <= q, else T.
std::size_t scored_estimate(const RunRecord& record, double q);

/// ARI between the true and the scored segmentation of (t0, T].
double record_ari(const RunRecord& record, double q);

/// 101 points evenly spaced on [0, 0.5].
std::vector<double> default_deltas();

/// Fraction of records with |tau_hat - tau| / (T - t0) <= delta, per delta.
std::vector<double> error_cdf(std::span<const RunRecord> records, std::span<const double> deltas, double q);

/// Fraction of records with p <= q.
double type1_rate(std::span<const RunRecord> records, double q);

} // namespace ccp::eval
