#pragma once

#include "ccp/detector.hpp"
#include "ccp/series.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ccp::bootstrap {

inline constexpr std::size_t kDefaultBootstraps = 240;
inline constexpr std::size_t kHallResamples = 40;
inline constexpr std::size_t kHallCandidates = 5;

struct BlockPlan {
    std::size_t block_length = 1;
    std::size_t n_blocks = 1;
    std::size_t b_count = kDefaultBootstraps;
};

/// Plan for resampling the window (t0, t_total] with blocks of length l.
BlockPlan make_plan(std::size_t t_total, std::size_t t0, std::size_t block_length,
                    std::size_t b_count = kDefaultBootstraps);

/// Candidate block lengths: kHallCandidates values equally spaced between
/// ceil(T^(1/5)) and ceil(T^(1/2)), rounded and deduplicated in order.
std::vector<std::size_t> hall_candidates(std::size_t t_total);

/// Variance of the sample mean across `resamples` circular moving block
/// bootstrap copies of `series`. Resample j draws its block starts from
/// derive_seed(seed, {j}).
double mbb_mean_variance(std::span<const double> series, std::size_t block_length, std::size_t resamples,
                         std::uint64_t seed);

struct HallSelection {
    std::size_t block_length = 1;
    double pilot_estimate = 0.0;
    std::vector<std::size_t> candidates;
    std::vector<double> estimates;
    bool clamped = false; // some candidate or the pilot exceeded the series length
};

/// Single-pass Hall-style selection: the candidate whose bootstrap variance
/// estimate of the sample mean lies closest to the pilot estimate. Ties go to
/// the shorter block.
HallSelection hall_block_length(std::span<const double> series, std::size_t pilot, std::size_t t_total,
                                std::uint64_t seed);

/// Per-dimension selection on (t0, T]; the longest selected block wins.
HallSelection select_block_length(const MultiSeries& y, std::size_t t0, std::size_t pilot, std::uint64_t seed);

/// Block start times drawn uniformly from [t0 + 1, t_total].
std::vector<std::size_t> draw_block_starts(std::size_t t_total, std::size_t t0, std::size_t block_length,
                                           std::uint64_t seed);

/// Source time index of every resampled point in (t0, t_total]; blocks wrap
/// from t_total back to t0 + 1.
std::vector<std::size_t> mbb_indices(std::size_t t_total, std::size_t t0, std::size_t block_length,
                                     std::span<const std::size_t> starts);

MultiSeries mbb_resample_from_starts(const MultiSeries& y, std::size_t t0, std::size_t block_length,
                                     std::span<const std::size_t> starts);

/// Keeps [1, t0] verbatim and rebuilds the tail from random wrapped blocks.
MultiSeries mbb_resample(const MultiSeries& y, std::size_t t0, std::size_t block_length, std::uint64_t seed);

/// Seed of bootstrap replicate b.
std::uint64_t replicate_seed(std::uint64_t master, std::size_t b);

struct NullDistribution {
    std::vector<double> k_values;
    std::size_t block_length = 1;
    std::optional<double> p;
};

/// Bootstrap statistics K_b computed with the frozen ensemble.
NullDistribution null_distribution(const MultiSeries& y, const detector::Ensemble& ensemble, std::size_t block_length,
                                   std::size_t b_count, std::uint64_t seed,
                                   const detector::StatisticOptions& options = {});

/// Fraction of bootstrap statistics strictly above the observed one.
double quantile_estimate(double k_observed, std::span<const double> k_values);

} // namespace ccp::bootstrap
