#include "ccp/pipeline.hpp"

#include "ccp/error.hpp"
#include "ccp/random.hpp"

#include <cmath>
#include <string>

namespace ccp {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

} // namespace

void DetectConfig::validate() const {
    require(t_train >= 1, "t_train must be at least 1");
    require(eps_train > 0.0 && eps_train < 1.0, "eps_train must lie in (0, 1)");
    require(kappa > 0.0 && kappa < 0.5, "kappa must lie in (0, 0.5)");
    require(nu > 0.0, "nu must be positive");
    require(q >= 0.0 && q <= 1.0, "q must lie in [0, 1]");
    require(r_ensemble >= 1, "r_ensemble must be at least 1");
    require(b_count >= 1, "b_count must be at least 1");
    require(std::isfinite(statistic_exponent) && statistic_exponent > 0.0, "statistic_exponent must be positive");
}

DetectionReport detect(const MultiSeries& y, const DetectConfig& config) {
    config.validate();
    const std::size_t t_wash_min = config.t_wash.value_or(0);
    require(t_wash_min + config.t_train + 2 <= y.length(), "series too short for washout, training and a split");

    DetectionReport report;
    report.config = config;

    esn::ScalingOptions scaling_options;
    scaling_options.seed = derive_seed(config.seed, {stream::scaling});
    report.scaling = esn::select_scaling(y, config.t_train, scaling_options);

    esn::FitOptions fit_options;
    fit_options.seed = derive_seed(config.seed, {stream::fit});
    fit_options.t_wash = config.t_wash;
    report.fit = esn::fit_hyperparams(y, config.t_train, report.scaling.best, config.eps_train, fit_options);

    const std::size_t t0 = report.t0();
    require(t0 + 2 <= y.length(), "series too short after the fitted washout");

    const detector::Ensemble ensemble = detector::build_ensemble(
        y, report.scaling.best, report.fit.params, config.r_ensemble, derive_seed(config.seed, {stream::ensemble}));
    const detector::SimilarityMatrix similarities = detector::featurize_similarities(y, ensemble);
    report.degenerate_similarities = similarities.degenerate_count;
    report.similarity = detector::aggregate(similarities);
    report.proposal = detector::propose(report.similarity, config.statistic_options());

    report.hall = bootstrap::select_block_length(y, t0, report.fit.params.t_wash, derive_seed(config.seed, {stream::hall}));
    report.null = bootstrap::null_distribution(y, ensemble, report.hall.block_length, config.b_count,
                                               derive_seed(config.seed, {stream::bootstrap}),
                                               config.statistic_options());
    report.null.p = bootstrap::quantile_estimate(report.proposal.k, report.null.k_values);

    const double p = *report.null.p;
    if (!(p >= 0.0 && p <= 1.0)) throw InvariantError("quantile estimate outside [0, 1]");
    if (report.proposal.tau_hat <= t0 || report.proposal.tau_hat >= y.length()) {
        throw InvariantError("change point estimate outside the admissible window");
    }
    return report;
}

} // namespace ccp
