#pragma once

#include "ccp/esn.hpp"
#include "ccp/series.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ccp::detector {

inline constexpr double kDefaultNu = 0.5;
inline constexpr double kDefaultKappa = 0.01;
inline constexpr double kDefaultExponent = 2.0;

struct Similarity {
    double value = 0.0;
    bool degenerate = false; // Ch or h had zero norm
};

/// Cosine of the angle between h and C h, clamped to [0, 1].
Similarity cosine_similarity(const Matrix& c, const Vector& h);

/// One featurization: a fixed reservoir and the conceptor of its training window.
struct EnsembleMember {
    esn::EsnWeights weights;
    esn::Conceptor conceptor;
};

struct Ensemble {
    std::vector<EnsembleMember> members;
    std::size_t t_wash = 0;
    std::size_t t_train = 0;

    std::size_t t0() const noexcept { return t_wash + t_train; }
};

/// Draws `count` reservoirs with the fitted size and computes each conceptor
/// from unfiltered states on [t_wash + 1, t_wash + t_train].
Ensemble build_ensemble(const MultiSeries& y, const esn::ScalingConfig& scaling, const esn::EsnHyperparams& params,
                        std::size_t count, std::uint64_t seed, double density = 0.0);

/// s_{r,t} for every member r (rows) and t in (T0, T] (columns).
struct SimilarityMatrix {
    Matrix values;
    std::size_t t0 = 0;
    std::size_t degenerate_count = 0;
};

/// Runs each member with its conceptor in the loop from t_wash + 1 onward,
/// starting from the unfiltered state at t_wash.
SimilarityMatrix featurize_similarities(const MultiSeries& y, const Ensemble& ensemble);

/// S_t for t in (t0, t_end]; values[i] holds S_{t0 + 1 + i}.
struct SimilaritySeries {
    std::vector<double> values;
    std::size_t t0 = 0;
    std::size_t t_end = 0;

    double at(std::size_t t) const { return values.at(t - t0 - 1); }
};

SimilaritySeries aggregate(const Matrix& similarities, std::size_t t0);
SimilaritySeries aggregate(const SimilarityMatrix& similarities);

/// Two-sample sup |F_left - F_right| over the pooled sample points.
double ks_distance(std::span<const double> left, std::span<const double> right);

/// max{ (x (1 - x))^nu, kappa } with x = (t - t0) / (t_end - t0).
double q_weight(std::size_t t, std::size_t t0, std::size_t t_end, double nu, double kappa);

struct StatisticOptions {
    double nu = kDefaultNu;
    double kappa = kDefaultKappa;
    /// Power of (T - T0) in the denominator of the split coefficient.
    double exponent = kDefaultExponent;
};

/// K_t for t in [t0 + 1, t_end - 1]; values[i] holds K_{t0 + 1 + i}.
struct StatisticSeries {
    std::vector<double> values;
    StatisticOptions options;
    std::size_t t0 = 0;
    std::size_t t_end = 0;

    double at(std::size_t t) const { return values.at(t - t0 - 1); }
};

StatisticSeries statistic_series(const SimilaritySeries& s, const StatisticOptions& options = {});

struct ChangePointProposal {
    double k = 0.0;
    std::size_t tau_hat = 0;
    StatisticSeries statistic;
};

/// Maximum of the statistic series; ties resolve to the earliest t.
ChangePointProposal propose(const SimilaritySeries& s, const StatisticOptions& options = {});

} // namespace ccp::detector
