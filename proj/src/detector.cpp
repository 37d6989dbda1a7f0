#include "ccp/detector.hpp"

#include "ccp/error.hpp"
#include "ccp/parallel.hpp"
#include "ccp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ccp::detector {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

void check_statistic_options(const StatisticOptions& o) {
    require(std::isfinite(o.nu) && o.nu > 0.0, "nu must be positive");
    require(std::isfinite(o.kappa) && o.kappa > 0.0, "kappa must be positive");
    require(std::isfinite(o.exponent) && o.exponent > 0.0, "statistic exponent must be positive");
}

Similarity similarity_of(const Vector& h, const Vector& filtered) {
    const double norm_h = h.norm();
    const double norm_f = filtered.norm();
    if (norm_h == 0.0 || norm_f == 0.0) return {0.0, true};
    const double cosine = filtered.dot(h) / (norm_f * norm_h);
    return {std::clamp(cosine, 0.0, 1.0), false};
}

} // namespace

Similarity cosine_similarity(const Matrix& c, const Vector& h) {
    require(c.rows() == c.cols() && c.rows() == h.size(), "cosine_similarity: shape mismatch");
    return similarity_of(h, c * h);
}

Ensemble build_ensemble(const MultiSeries& y, const esn::ScalingConfig& scaling, const esn::EsnHyperparams& params,
                        std::size_t count, std::uint64_t seed, double density) {
    require(count >= 1, "build_ensemble: ensemble must be nonempty");
    require(params.t_train >= 1 && params.t_wash + params.t_train < y.length(),
            "build_ensemble: washout plus training must be shorter than the series");

    Ensemble ensemble;
    ensemble.t_wash = params.t_wash;
    ensemble.t_train = params.t_train;
    ensemble.members.resize(count);
    const std::size_t t0 = ensemble.t0();
    parallel_for(count, [&](std::size_t r) {
        const auto member_seed = derive_seed(seed, {stream::ensemble, static_cast<std::uint64_t>(r)});
        EnsembleMember& m = ensemble.members[r];
        m.weights = esn::init_weights(member_seed, params.n, y.dims(), scaling, density);
        const auto run = esn::propagate(m.weights, y, Vector::Zero(static_cast<Eigen::Index>(params.n)), 1, t0);
        m.conceptor = esn::compute_conceptor(run.states.bottomRows(static_cast<Eigen::Index>(params.t_train)),
                                             params.alpha);
    });
    return ensemble;
}

SimilarityMatrix featurize_similarities(const MultiSeries& y, const Ensemble& ensemble) {
    require(!ensemble.members.empty(), "featurize_similarities: empty ensemble");
    const std::size_t t0 = ensemble.t0();
    const std::size_t t_end = y.length();
    require(t0 < t_end, "featurize_similarities: no points after the training window");

    const auto rows = static_cast<Eigen::Index>(ensemble.members.size());
    const auto cols = static_cast<Eigen::Index>(t_end - t0);
    SimilarityMatrix out;
    out.t0 = t0;
    out.values.resize(rows, cols);
    std::vector<std::size_t> degenerate(ensemble.members.size(), 0);
    std::vector<char> finite(ensemble.members.size(), 1);

    parallel_for(ensemble.members.size(), [&](std::size_t r) {
        const EnsembleMember& m = ensemble.members[r];
        const esn::EsnWeights& w = m.weights;
        const Matrix& c = m.conceptor.c;
        const auto n = static_cast<Eigen::Index>(w.size());
        require(c.rows() == n, "featurize_similarities: conceptor does not match reservoir");
        require(y.dims() == w.input_dims(), "featurize_similarities: input dimension does not match reservoir");

        Vector prev = Vector::Zero(n);
        Vector pre(n);
        Vector h(n);
        for (std::size_t t = 1; t <= t_end; ++t) {
            pre.noalias() = w.w_h * prev;
            pre.noalias() += w.w_i * y.at(t).transpose();
            pre += w.b;
            h = pre.array().tanh().matrix();
            if (t <= ensemble.t_wash) {
                prev = h;
                continue;
            }
            prev.noalias() = c * h;
            if (t > t0) {
                const Similarity s = similarity_of(h, prev);
                if (s.degenerate) ++degenerate[r];
                out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t - t0 - 1)) = s.value;
            }
        }
        if (!prev.allFinite()) finite[r] = 0;
    });

    if (std::find(finite.begin(), finite.end(), 0) != finite.end() || !out.values.allFinite()) {
        throw InvariantError("featurize_similarities: reservoir state became non-finite");
    }
    out.degenerate_count = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
    return out;
}

SimilaritySeries aggregate(const Matrix& similarities, std::size_t t0) {
    require(similarities.rows() >= 1 && similarities.cols() >= 1, "aggregate: empty similarity matrix");
    SimilaritySeries s;
    s.t0 = t0;
    s.t_end = t0 + static_cast<std::size_t>(similarities.cols());
    s.values.resize(static_cast<std::size_t>(similarities.cols()));
    const double rows = static_cast<double>(similarities.rows());
    for (Eigen::Index j = 0; j < similarities.cols(); ++j) {
        double sum = 0.0;
        for (Eigen::Index r = 0; r < similarities.rows(); ++r) sum += similarities(r, j);
        s.values[static_cast<std::size_t>(j)] = std::clamp(sum / rows, 0.0, 1.0);
    }
    return s;
}

SimilaritySeries aggregate(const SimilarityMatrix& similarities) { return aggregate(similarities.values, similarities.t0); }

double ks_distance(std::span<const double> left, std::span<const double> right) {
    require(!left.empty() && !right.empty(), "ks_distance: samples must be nonempty");
    std::vector<double> a(left.begin(), left.end());
    std::vector<double> b(right.begin(), right.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());

    std::size_t i = 0;
    std::size_t j = 0;
    double best = 0.0;
    while (i < a.size() || j < b.size()) {
        double v;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
            v = a[i];
        } else {
            v = b[j];
        }
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return best;
}

double q_weight(std::size_t t, std::size_t t0, std::size_t t_end, double nu, double kappa) {
    require(t0 < t && t < t_end, "q_weight: t must lie strictly between t0 and t_end");
    require(nu > 0.0 && kappa > 0.0, "q_weight: nu and kappa must be positive");
    const double k = static_cast<double>(t - t0);
    const double span = static_cast<double>(t_end - t0);
    // k (span - k) / span^2 is symmetric under k -> span - k.
    const double x = (k * (span - k)) / (span * span);
    return std::max(std::pow(x, nu), kappa);
}

StatisticSeries statistic_series(const SimilaritySeries& s, const StatisticOptions& options) {
    check_statistic_options(options);
    const std::size_t m = s.values.size();
    require(m >= 2, "statistic_series: need at least two similarity values");
    require(s.t_end == s.t0 + m, "statistic_series: inconsistent series bounds");

    // Ranks over distinct values; ECDF differences only change at those points.
    std::vector<double> distinct(s.values);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<std::size_t> rank(m);
    std::vector<std::size_t> total(distinct.size(), 0);
    for (std::size_t i = 0; i < m; ++i) {
        rank[i] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), s.values[i]) -
                                           distinct.begin());
        ++total[rank[i]];
    }

    StatisticSeries out;
    out.options = options;
    out.t0 = s.t0;
    out.t_end = s.t_end;
    out.values.resize(m - 1);

    const double span = static_cast<double>(m);
    const double scale = std::pow(span, options.exponent);
    std::vector<std::size_t> left(distinct.size(), 0);
    for (std::size_t k = 1; k < m; ++k) {
        ++left[rank[k - 1]];
        const double n_left = static_cast<double>(k);
        const double n_right = static_cast<double>(m - k);
        std::size_t cum_left = 0;
        std::size_t cum_all = 0;
        double sup = 0.0;
        for (std::size_t u = 0; u < distinct.size(); ++u) {
            cum_left += left[u];
            cum_all += total[u];
            const double diff = static_cast<double>(cum_left) / n_left - static_cast<double>(cum_all - cum_left) / n_right;
            sup = std::max(sup, std::abs(diff));
        }
        const std::size_t t = s.t0 + k;
        const double q = q_weight(t, s.t0, s.t_end, options.nu, options.kappa);
        out.values[k - 1] = (n_left * n_right) / (q * scale) * sup;
    }
    return out;
}

ChangePointProposal propose(const SimilaritySeries& s, const StatisticOptions& options) {
    ChangePointProposal p;
    p.statistic = statistic_series(s, options);
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.statistic.values.size(); ++i) {
        if (p.statistic.values[i] > p.statistic.values[best]) best = i;
    }
    p.k = p.statistic.values[best];
    p.tau_hat = s.t0 + 1 + best;
    return p;
}

} // namespace ccp::detector
