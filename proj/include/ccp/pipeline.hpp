#pragma once

#include "ccp/bootstrap.hpp"
#include "ccp/detector.hpp"
#include "ccp/esn.hpp"
#include "ccp/series.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace ccp {

/// Settings of one end-to-end detection run.
struct DetectConfig {
    std::optional<std::size_t> t_wash; // searched when absent
    std::size_t t_train = 0;
    double eps_train = 0.04;
    std::size_t r_ensemble = 100;
    std::size_t b_count = bootstrap::kDefaultBootstraps;
    double nu = detector::kDefaultNu;
    double kappa = detector::kDefaultKappa;
    double q = 0.05;
    std::uint64_t seed = 0;
    double statistic_exponent = detector::kDefaultExponent;

    /// Throws InputError for out-of-range settings.
    void validate() const;

    detector::StatisticOptions statistic_options() const { return {nu, kappa, statistic_exponent}; }
};

struct DetectionReport {
    DetectConfig config;
    esn::ScalingSelection scaling;
    esn::FitResult fit;
    detector::SimilaritySeries similarity;
    detector::ChangePointProposal proposal;
    std::size_t degenerate_similarities = 0;
    bootstrap::HallSelection hall;
    bootstrap::NullDistribution null;

    std::size_t tau_hat() const noexcept { return proposal.tau_hat; }
    double k() const noexcept { return proposal.k; }
    double p() const { return null.p.value(); }
    std::size_t t0() const noexcept { return fit.params.t_wash + fit.params.t_train; }
    bool rejects_null() const { return p() <= config.q; }
};

/// Scaling search, size and aperture fit, ensemble featurization, change
/// point proposal, block length selection and the bootstrap null.
DetectionReport detect(const MultiSeries& y, const DetectConfig& config);

} // namespace ccp
