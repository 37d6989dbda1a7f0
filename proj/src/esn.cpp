#include "ccp/esn.hpp"

#include "ccp/error.hpp"
#include "ccp/parallel.hpp"
#include "ccp/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ccp::esn {

namespace {

constexpr int kMaxWeightAttempts = 10;

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

Vector initial_state(std::size_t n, double value) { return Vector::Constant(static_cast<Eigen::Index>(n), value); }

// Raw run over [1, T0] from the all-zeros state, kept so the aperture ladder
// can reuse it.
struct TrainingRun {
    Matrix states;  // T0 x N
    Vector h_wash;  // raw state at t_wash (zeros when t_wash = 0)
};

TrainingRun run_training(const EsnWeights& w, const MultiSeries& y, std::size_t t_wash, std::size_t t_train) {
    const std::size_t t0 = t_wash + t_train;
    TrainingRun run;
    run.states = propagate(w, y, initial_state(w.size(), 0.0), 1, t0).states;
    run.h_wash = t_wash == 0 ? initial_state(w.size(), 0.0)
                             : Vector(run.states.row(static_cast<Eigen::Index>(t_wash - 1)).transpose());
    return run;
}

double filtered_nrmse_one(const EsnWeights& w, const TrainingRun& run, const MultiSeries& y, std::size_t t_wash,
                          std::size_t t_train, double alpha, double lambda) {
    const std::size_t t0 = t_wash + t_train;
    const Matrix h_train = run.states.bottomRows(static_cast<Eigen::Index>(t_train));
    const Conceptor c = compute_conceptor(h_train, alpha);
    const StateSequence filtered = propagate(w, y, c, run.h_wash, t_wash + 1, t0);
    const Matrix targets = y.window(t_wash + 1, t0);
    const Matrix w_out = ridge_readout(filtered.filtered, targets, lambda);
    return nrmse(targets, filtered.filtered * w_out.transpose());
}

} // namespace

void ScalingConfig::validate() const {
    require(std::isfinite(c_input) && c_input > 0.0, "c_input must be positive");
    require(std::isfinite(c_bias) && c_bias > 0.0, "c_bias must be positive");
    require(std::isfinite(rho) && rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
}

double default_density(std::size_t n) { return std::min(10.0 / static_cast<double>(n), 1.0); }

double nrmse(const Matrix& y, const Matrix& yhat) {
    require(y.rows() == yhat.rows() && y.cols() == yhat.cols(), "nrmse: shape mismatch");
    require(y.rows() >= 2, "nrmse: at least two time points required");
    require(y.cols() >= 1, "nrmse: at least one dimension required");

    const double count = static_cast<double>(y.rows());
    double total = 0.0;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const auto a = y.col(j);
        const auto b = yhat.col(j);
        const double mse = (a - b).squaredNorm() / count;
        const double var_a = (a.array() - a.mean()).square().sum() / count;
        const double var_b = (b.array() - b.mean()).square().sum() / count;
        const double denom = 0.5 * var_a + 0.5 * var_b;
        if (!(denom > 0.0)) throw DegenerateVarianceError(static_cast<std::size_t>(j));
        total += std::sqrt(mse / denom);
    }
    return total / static_cast<double>(y.cols());
}

double nrmse(const MultiSeries& y, const MultiSeries& yhat) { return nrmse(y.values(), yhat.values()); }

double spectral_radius(const Matrix& m) {
    require(m.rows() == m.cols(), "spectral_radius: matrix must be square");
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> solver(m, false);
    if (solver.info() != Eigen::Success) throw InvariantError("eigenvalue solver did not converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

EsnWeights init_weights(std::uint64_t seed, std::size_t n, std::size_t d, const ScalingConfig& scaling,
                        double density) {
    require(n >= 1 && d >= 1, "init_weights: n and d must be positive");
    scaling.validate();
    if (density <= 0.0) density = default_density(n);
    require(density <= 1.0, "init_weights: density must lie in (0, 1]");

    const auto ni = static_cast<Eigen::Index>(n);
    const std::size_t cells = n * n;
    const auto nonzeros = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(density * static_cast<double>(cells))), 1, cells);

    for (int attempt = 0; attempt < kMaxWeightAttempts; ++attempt) {
        Rng rng(attempt == 0 ? seed : derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
        std::normal_distribution<double> normal(0.0, 1.0);

        EsnWeights w;
        w.seed = seed;
        w.w_i.resize(ni, static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < ni; ++i)
            for (Eigen::Index j = 0; j < w.w_i.cols(); ++j) w.w_i(i, j) = scaling.c_input * normal(rng);
        w.b.resize(ni);
        for (Eigen::Index i = 0; i < ni; ++i) w.b(i) = scaling.c_bias * normal(rng);

        // Exactly `nonzeros` distinct positions by partial Fisher-Yates.
        std::vector<std::size_t> slots(cells);
        std::iota(slots.begin(), slots.end(), std::size_t{0});
        for (std::size_t k = 0; k < nonzeros; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, cells - 1);
            std::swap(slots[k], slots[pick(rng)]);
        }
        std::sort(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(nonzeros));

        Matrix dense = Matrix::Zero(ni, ni);
        for (std::size_t k = 0; k < nonzeros; ++k) {
            dense(static_cast<Eigen::Index>(slots[k] / n), static_cast<Eigen::Index>(slots[k] % n)) = normal(rng);
        }

        const double radius = spectral_radius(dense);
        if (!(radius > 1e-8 * std::max(1.0, dense.norm()))) continue;

        dense *= scaling.rho / radius;
        w.w_h = dense.sparseView(0.0, 0.0);
        if (scaling.rho == 0.0) w.w_h.setZero();
        w.w_h.makeCompressed();
        return w;
    }
    throw InvariantError("init_weights: recurrent matrix had zero spectral radius in " +
                         std::to_string(kMaxWeightAttempts) + " draws");
}

namespace {

StateSequence propagate_impl(const EsnWeights& w, const MultiSeries& y, const Conceptor* conceptor, const Vector& h0,
                             std::size_t t_start, std::size_t t_end) {
    require(t_start >= 1 && t_start <= t_end && t_end <= y.length(), "propagate: time range out of bounds");
    require(y.dims() == w.input_dims(), "propagate: input dimension does not match weights");
    require(static_cast<std::size_t>(h0.size()) == w.size(), "propagate: initial state has wrong size");
    require(h0.allFinite(), "propagate: initial state must be finite");
    if (conceptor != nullptr) {
        require(static_cast<std::size_t>(conceptor->c.rows()) == w.size() && conceptor->c.rows() == conceptor->c.cols(),
                "propagate: conceptor has wrong shape");
    }

    const auto steps = static_cast<Eigen::Index>(t_end - t_start + 1);
    const auto n = static_cast<Eigen::Index>(w.size());
    StateSequence out;
    out.t_start = t_start;
    out.t_end = t_end;
    out.states.resize(steps, n);
    out.filtered.resize(steps, n);

    Vector prev = h0;
    Vector pre(n);
    Vector h(n);
    for (Eigen::Index i = 0; i < steps; ++i) {
        const auto t = t_start + static_cast<std::size_t>(i);
        pre.noalias() = w.w_h * prev;
        pre.noalias() += w.w_i * y.at(t).transpose();
        pre += w.b;
        h = pre.array().tanh().matrix();
        out.states.row(i) = h.transpose();
        if (conceptor != nullptr) {
            prev.noalias() = conceptor->c * h;
        } else {
            prev = h;
        }
        out.filtered.row(i) = prev.transpose();
    }
    return out;
}

} // namespace

StateSequence propagate(const EsnWeights& weights, const MultiSeries& y, const Vector& h0, std::size_t t_start,
                        std::size_t t_end) {
    return propagate_impl(weights, y, nullptr, h0, t_start, t_end);
}

StateSequence propagate(const EsnWeights& weights, const MultiSeries& y, const Conceptor& conceptor,
                        const Vector& h0, std::size_t t_start, std::size_t t_end) {
    return propagate_impl(weights, y, &conceptor, h0, t_start, t_end);
}

Conceptor compute_conceptor(const Matrix& h_train, double alpha) {
    require(h_train.rows() >= 1 && h_train.cols() >= 1, "compute_conceptor: empty state matrix");
    require(std::isfinite(alpha) && alpha > 0.0, "compute_conceptor: aperture must be positive");
    if (!h_train.allFinite()) throw InputError("compute_conceptor: non-finite training states");

    const auto n = h_train.cols();
    const Matrix r = (h_train.transpose() * h_train) / static_cast<double>(h_train.rows());
    const double reg = 1.0 / (alpha * alpha);
    const Matrix shifted = r + reg * Matrix::Identity(n, n);

    // R and (R + reg I) commute, so C = (R + reg I)^-1 R.
    Matrix x;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
        x = llt.solve(r);
    } else {
        // reg below the rounding level of R: fall back to the eigenbasis.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(r);
        const Vector lambda = eig.eigenvalues().cwiseMax(0.0);
        const Vector ratio = lambda.array() / (lambda.array() + reg);
        x = eig.eigenvectors() * ratio.asDiagonal() * eig.eigenvectors().transpose();
    }
    if (!x.allFinite()) throw InvariantError("compute_conceptor: non-finite conceptor");

    Conceptor c;
    c.c = 0.5 * (x + x.transpose());
    c.alpha = alpha;
    return c;
}

Matrix ridge_readout(const Matrix& h, const Matrix& y, double lambda) {
    require(h.rows() == y.rows(), "ridge_readout: state and target lengths differ");
    require(h.rows() >= 1, "ridge_readout: no samples");
    require(std::isfinite(lambda) && lambda > 0.0, "ridge_readout: lambda must be positive");
    Matrix gram = h.transpose() * h;
    gram.diagonal().array() += lambda;
    const Matrix rhs = h.transpose() * y;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) throw InvariantError("ridge_readout: factorization failed");
    const Matrix x = llt.solve(rhs);
    return x.transpose();
}

std::uint64_t network_seed(std::uint64_t master, std::size_t n, std::size_t r) {
    return derive_seed(master, {stream::fit, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
}

ScalingSelection select_scaling(const MultiSeries& y, std::size_t t_train, const ScalingOptions& options) {
    require(t_train >= 1, "select_scaling: t_train must be positive");
    require(t_train + options.t_wash <= y.length(), "select_scaling: series shorter than washout plus training");
    require(!options.c_input_grid.empty() && !options.c_bias_grid.empty(), "select_scaling: empty grid");
    require(options.initializations >= 1, "select_scaling: need at least one initialization");

    const std::size_t d = y.dims();
    const std::size_t n = options.n == 0 ? 10 * d : options.n;
    const std::size_t first = options.t_wash + 1;
    const std::size_t last = options.t_wash + t_train;
    const Matrix targets = y.window(first, last);

    ScalingSelection sel;
    for (double ci : options.c_input_grid)
        for (double cb : options.c_bias_grid) sel.cells.push_back({ScalingConfig{ci, cb, options.rho}, 0.0});

    const std::size_t reps = options.initializations;
    std::vector<double> scores(sel.cells.size() * reps);
    parallel_for(scores.size(), [&](std::size_t job) {
        const std::size_t cell = job / reps;
        const std::size_t r = job % reps;
        const auto seed = derive_seed(options.seed, {stream::scaling, static_cast<std::uint64_t>(r)});
        const EsnWeights w = init_weights(seed, n, d, sel.cells[cell].config, options.density);
        const Matrix states = propagate(w, y, initial_state(n, 0.0), 1, last).states;
        const Matrix h = states.bottomRows(static_cast<Eigen::Index>(t_train));
        const Matrix w_out = ridge_readout(h, targets, options.lambda);
        scores[job] = nrmse(targets, h * w_out.transpose());
    });

    for (std::size_t cell = 0; cell < sel.cells.size(); ++cell) {
        double sum = 0.0;
        for (std::size_t r = 0; r < reps; ++r) sum += scores[cell * reps + r];
        sel.cells[cell].nrmse = sum / static_cast<double>(reps);
        if (sel.cells[cell].nrmse < sel.cells[sel.best_index].nrmse) sel.best_index = cell;
    }
    sel.best = sel.cells[sel.best_index].config;
    return sel;
}

WashoutResult washout_length(const MultiSeries& y, const ScalingConfig& scaling, std::size_t n,
                             const WashoutOptions& options) {
    require(options.eps_wash > 0.0, "washout_length: eps_wash must be positive");
    require(options.initializations >= 1, "washout_length: need at least one initialization");

    WashoutResult result;
    result.networks.reserve(options.initializations);
    for (std::size_t r = 0; r < options.initializations; ++r) {
        result.networks.push_back(init_weights(network_seed(options.seed, n, r), n, y.dims(), scaling, options.density));
    }

    const auto ni = static_cast<Eigen::Index>(n);
    std::vector<Vector> from_zero(options.initializations, Vector::Zero(ni));
    std::vector<Vector> from_one(options.initializations, Vector::Ones(ni));
    Vector drive(ni);
    for (std::size_t t = 1; t <= y.length(); ++t) {
        double gap = 0.0;
        for (std::size_t r = 0; r < options.initializations; ++r) {
            const EsnWeights& w = result.networks[r];
            drive.noalias() = w.w_i * y.at(t).transpose();
            drive += w.b;
            Vector a = w.w_h * from_zero[r];
            Vector b = w.w_h * from_one[r];
            from_zero[r] = (a + drive).array().tanh().matrix();
            from_one[r] = (b + drive).array().tanh().matrix();
            gap = std::max(gap, (from_zero[r] - from_one[r]).cwiseAbs().maxCoeff());
        }
        if (gap < options.eps_wash) {
            result.t_wash = t;
            return result;
        }
    }
    throw FitError("washout_length: reservoir states did not converge within the series length");
}

double aperture_for_step(std::size_t n, int ladder_step) {
    return static_cast<double>(n) * std::pow(10.0, 0.5 * static_cast<double>(ladder_step));
}

std::size_t grow_reservoir(std::size_t n, std::size_t d) { return std::max<std::size_t>(d, 2) * n; }

double filtered_readout_nrmse(const std::vector<EsnWeights>& networks, const MultiSeries& y, std::size_t t_wash,
                              std::size_t t_train, double alpha, double lambda) {
    require(!networks.empty(), "filtered_readout_nrmse: no networks");
    require(t_wash + t_train <= y.length(), "filtered_readout_nrmse: window exceeds series");
    std::vector<double> scores(networks.size());
    parallel_for(networks.size(), [&](std::size_t r) {
        const TrainingRun run = run_training(networks[r], y, t_wash, t_train);
        scores[r] = filtered_nrmse_one(networks[r], run, y, t_wash, t_train, alpha, lambda);
    });
    return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

FitResult fit_hyperparams(const MultiSeries& y, std::size_t t_train, const ScalingConfig& scaling, double eps_train,
                          const FitOptions& options) {
    require(eps_train > 0.0 && eps_train < 1.0, "fit_hyperparams: eps_train must lie in (0, 1)");
    require(t_train >= 2, "fit_hyperparams: t_train must be at least 2");
    require(options.initializations >= 1, "fit_hyperparams: need at least one initialization");
    scaling.validate();

    const std::size_t d = y.dims();
    const std::size_t cap = options.n_cap_factor * d;
    std::size_t n = 10 * d;
    int step = 0;

    FitResult result;
    std::vector<EsnWeights> networks;
    std::vector<TrainingRun> runs;
    std::size_t t_wash = 0;
    std::size_t prepared_n = 0;

    for (;;) {
        if (n > cap) {
            throw FitError("fit_hyperparams: reservoir size exceeded " + std::to_string(cap) +
                           " without reaching NRMSE " + std::to_string(eps_train));
        }
        if (prepared_n != n) {
            if (options.t_wash) {
                t_wash = *options.t_wash;
                networks.clear();
                for (std::size_t r = 0; r < options.initializations; ++r) {
                    networks.push_back(init_weights(network_seed(options.seed, n, r), n, d, scaling, options.density));
                }
            } else {
                WashoutOptions wo;
                wo.initializations = options.initializations;
                wo.eps_wash = options.eps_wash;
                wo.density = options.density;
                wo.seed = options.seed;
                WashoutResult washout = washout_length(y, scaling, n, wo);
                t_wash = washout.t_wash;
                networks = std::move(washout.networks);
            }
            require(t_wash + t_train < y.length(), "fit_hyperparams: washout plus training must be shorter than the series");
            runs.assign(networks.size(), {});
            parallel_for(networks.size(), [&](std::size_t r) { runs[r] = run_training(networks[r], y, t_wash, t_train); });
            prepared_n = n;
        }

        const double alpha = aperture_for_step(n, step);
        std::vector<double> scores(networks.size());
        parallel_for(networks.size(), [&](std::size_t r) {
            scores[r] = filtered_nrmse_one(networks[r], runs[r], y, t_wash, t_train, alpha, options.lambda);
        });
        const double err = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        result.steps.push_back({n, alpha, t_wash, err});

        if (err <= eps_train) {
            result.params = EsnHyperparams{n, alpha, t_wash, t_train, eps_train};
            result.nrmse = err;
            return result;
        }
        if (step <= kLastLadderStep) {
            ++step;
        } else {
            n = grow_reservoir(n, d);
            step = 0;
        }
    }
}

} // namespace ccp::esn
