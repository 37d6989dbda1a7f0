#include "ccp/bootstrap.hpp"

#include "ccp/error.hpp"
#include "ccp/parallel.hpp"
#include "ccp/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccp::bootstrap {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

// Smallest c with c^k >= value.
std::size_t ceil_root(std::size_t value, int k) {
    std::size_t c = 1;
    auto power = [k](std::size_t base) {
        double p = 1.0;
        for (int i = 0; i < k; ++i) p *= static_cast<double>(base);
        return p;
    };
    while (power(c) < static_cast<double>(value)) ++c;
    return c;
}

} // namespace

BlockPlan make_plan(std::size_t t_total, std::size_t t0, std::size_t block_length, std::size_t b_count) {
    require(t0 < t_total, "block plan: t0 must precede the end of the series");
    const std::size_t tail = t_total - t0;
    require(block_length >= 1 && block_length <= tail, "block plan: block length must lie in [1, T - t0]");
    require(b_count >= 1, "block plan: need at least one bootstrap");
    return BlockPlan{block_length, (tail + block_length - 1) / block_length, b_count};
}

std::vector<std::size_t> hall_candidates(std::size_t t_total) {
    require(t_total >= 1, "hall_candidates: empty series");
    const auto lo = static_cast<double>(ceil_root(t_total, 5));
    const auto hi = static_cast<double>(ceil_root(t_total, 2));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < kHallCandidates; ++i) {
        const double v = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kHallCandidates - 1);
        const auto rounded = static_cast<std::size_t>(std::lround(v));
        if (std::find(out.begin(), out.end(), rounded) == out.end()) out.push_back(rounded);
    }
    return out;
}

double mbb_mean_variance(std::span<const double> series, std::size_t block_length, std::size_t resamples,
                         std::uint64_t seed) {
    const std::size_t n = series.size();
    require(n >= 1, "mbb_mean_variance: empty series");
    require(block_length >= 1 && block_length <= n, "mbb_mean_variance: block length must lie in [1, n]");
    require(resamples >= 2, "mbb_mean_variance: need at least two resamples");

    const std::size_t blocks = (n + block_length - 1) / block_length;
    std::vector<double> means(resamples);
    for (std::size_t j = 0; j < resamples; ++j) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(j)}));
        std::uniform_int_distribution<std::size_t> start(0, n - 1);
        double sum = 0.0;
        std::size_t taken = 0;
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t s = start(rng);
            for (std::size_t i = 0; i < block_length && taken < n; ++i, ++taken) sum += series[(s + i) % n];
        }
        means[j] = sum / static_cast<double>(n);
    }
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= static_cast<double>(resamples);
    double ss = 0.0;
    for (double m : means) ss += (m - mean) * (m - mean);
    return ss / static_cast<double>(resamples - 1);
}

HallSelection hall_block_length(std::span<const double> series, std::size_t pilot, std::size_t t_total,
                                std::uint64_t seed) {
    require(pilot >= 2, "hall_block_length: pilot block length must be at least 2");
    require(series.size() >= pilot, "hall_block_length: series shorter than the pilot block length");

    HallSelection sel;
    sel.candidates = hall_candidates(t_total);
    for (auto& c : sel.candidates) {
        if (c > series.size()) {
            c = series.size();
            sel.clamped = true;
        }
    }
    sel.candidates.erase(std::unique(sel.candidates.begin(), sel.candidates.end()), sel.candidates.end());

    sel.pilot_estimate = mbb_mean_variance(series, pilot, kHallResamples, derive_seed(seed, {0}));
    sel.estimates.resize(sel.candidates.size());
    parallel_for(sel.candidates.size(), [&](std::size_t i) {
        sel.estimates[i] = mbb_mean_variance(series, sel.candidates[i], kHallResamples,
                                             derive_seed(seed, {static_cast<std::uint64_t>(i + 1)}));
    });

    std::size_t best = 0;
    double best_gap = 0.0;
    for (std::size_t i = 0; i < sel.candidates.size(); ++i) {
        const double gap = (sel.estimates[i] - sel.pilot_estimate) * (sel.estimates[i] - sel.pilot_estimate);
        if (i == 0 || gap < best_gap || (gap == best_gap && sel.candidates[i] < sel.candidates[best])) {
            best = i;
            best_gap = gap;
        }
    }
    sel.block_length = sel.candidates[best];
    return sel;
}

HallSelection select_block_length(const MultiSeries& y, std::size_t t0, std::size_t pilot, std::uint64_t seed) {
    require(t0 < y.length(), "select_block_length: no points after t0");
    const std::size_t tail = y.length() - t0;
    const std::size_t effective_pilot = std::clamp<std::size_t>(pilot, 2, std::max<std::size_t>(tail, 2));
    require(tail >= 2, "select_block_length: need at least two points after t0");

    HallSelection best;
    bool first = true;
    for (std::size_t j = 0; j < y.dims(); ++j) {
        std::vector<double> column(tail);
        for (std::size_t i = 0; i < tail; ++i) column[i] = y.at(t0 + 1 + i)(static_cast<Eigen::Index>(j));
        HallSelection sel = hall_block_length(column, effective_pilot, y.length(),
                                              derive_seed(seed, {stream::hall, static_cast<std::uint64_t>(j)}));
        sel.clamped = sel.clamped || effective_pilot != pilot;
        if (first || sel.block_length > best.block_length) {
            best = std::move(sel);
            first = false;
        }
    }
    return best;
}

std::vector<std::size_t> draw_block_starts(std::size_t t_total, std::size_t t0, std::size_t block_length,
                                           std::uint64_t seed) {
    const BlockPlan plan = make_plan(t_total, t0, block_length, 1);
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> start(t0 + 1, t_total);
    std::vector<std::size_t> starts(plan.n_blocks);
    for (auto& s : starts) s = start(rng);
    return starts;
}

std::vector<std::size_t> mbb_indices(std::size_t t_total, std::size_t t0, std::size_t block_length,
                                     std::span<const std::size_t> starts) {
    const BlockPlan plan = make_plan(t_total, t0, block_length, 1);
    require(starts.size() == plan.n_blocks, "mbb_indices: wrong number of block starts");
    const std::size_t tail = t_total - t0;
    std::vector<std::size_t> idx;
    idx.reserve(tail);
    for (std::size_t s : starts) {
        require(s > t0 && s <= t_total, "mbb_indices: block start outside (t0, T]");
        for (std::size_t j = 0; j < block_length && idx.size() < tail; ++j) {
            idx.push_back(t0 + 1 + (s - t0 - 1 + j) % tail);
        }
    }
    return idx;
}

MultiSeries mbb_resample_from_starts(const MultiSeries& y, std::size_t t0, std::size_t block_length,
                                     std::span<const std::size_t> starts) {
    const auto idx = mbb_indices(y.length(), t0, block_length, starts);
    Matrix out(y.values().rows(), y.values().cols());
    out.topRows(static_cast<Eigen::Index>(t0)) = y.values().topRows(static_cast<Eigen::Index>(t0));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(t0 + i)) = y.at(idx[i]);
    }
    return MultiSeries(std::move(out));
}

MultiSeries mbb_resample(const MultiSeries& y, std::size_t t0, std::size_t block_length, std::uint64_t seed) {
    const auto starts = draw_block_starts(y.length(), t0, block_length, seed);
    return mbb_resample_from_starts(y, t0, block_length, starts);
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t b) {
    return derive_seed(master, {stream::bootstrap, static_cast<std::uint64_t>(b)});
}

NullDistribution null_distribution(const MultiSeries& y, const detector::Ensemble& ensemble, std::size_t block_length,
                                   std::size_t b_count, std::uint64_t seed, const detector::StatisticOptions& options) {
    const std::size_t t0 = ensemble.t0();
    (void)make_plan(y.length(), t0, block_length, b_count);

    NullDistribution null;
    null.block_length = block_length;
    null.k_values.resize(b_count);
    parallel_for(b_count, [&](std::size_t b) {
        const MultiSeries resampled = mbb_resample(y, t0, block_length, replicate_seed(seed, b));
        const auto similarities = detector::featurize_similarities(resampled, ensemble);
        null.k_values[b] = detector::propose(detector::aggregate(similarities), options).k;
    });
    return null;
}

double quantile_estimate(double k_observed, std::span<const double> k_values) {
    require(!k_values.empty(), "quantile_estimate: empty null sample");
    const auto above = std::count_if(k_values.begin(), k_values.end(), [&](double k) { return k > k_observed; });
    return static_cast<double>(above) / static_cast<double>(k_values.size());
}

} // namespace ccp::bootstrap
