#pragma once

#include "ccp/series.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace ccp::esn {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double kDefaultSpectralRadius = 0.8;
inline constexpr double kDefaultRidge = 1e-4;
inline constexpr std::size_t kDefaultInitializations = 10;

/// Input, bias, and recurrent scaling of a reservoir.
struct ScalingConfig {
    double c_input = 1.0;
    double c_bias = 0.1;
    double rho = kDefaultSpectralRadius;

    /// Throws InputError unless c_input > 0, c_bias > 0 and 0 <= rho < 1.
    void validate() const;

    friend bool operator==(const ScalingConfig&, const ScalingConfig&) = default;
};

/// Random matrices of one reservoir. w_h is sparse with spectral radius rho.
struct EsnWeights {
    SparseMatrix w_h;
    Matrix w_i;
    Vector b;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(b.size()); }
    std::size_t input_dims() const noexcept { return static_cast<std::size_t>(w_i.cols()); }
};

struct EsnHyperparams {
    std::size_t n = 0;
    double alpha = 0.0;
    std::size_t t_wash = 0;
    std::size_t t_train = 0;
    double eps_train = 0.04;
};

/// C = R (R + alpha^-2 I)^-1 for the state second-moment matrix R.
struct Conceptor {
    Matrix c;
    double alpha = 0.0;
};

/// Raw states h_t and filtered states C h_t for t in [t_start, t_end]; row i
/// holds time t_start + i.
struct StateSequence {
    Matrix states;
    Matrix filtered;
    std::size_t t_start = 0;
    std::size_t t_end = 0;
};

/// Expected nonzeros per row of w_h is 10, capped at a dense matrix.
double default_density(std::size_t n);

/// Mean over dimensions of sqrt(mse / (Var(y)/2 + Var(yhat)/2)), using
/// population variances. Rows are time points.
double nrmse(const Matrix& y, const Matrix& yhat);
double nrmse(const MultiSeries& y, const MultiSeries& yhat);

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Matrix& m);

/// Draws one reservoir. Deterministic in `seed`. A non-positive density
/// selects default_density(n).
EsnWeights init_weights(std::uint64_t seed, std::size_t n, std::size_t d, const ScalingConfig& scaling,
                        double density = 0.0);

/// Propagates h_t = tanh(W^h h~_{t-1} + W^i y_t + b) over [t_start, t_end]
/// with h~_{t_start-1} = h0. Without a conceptor h~ = h.
StateSequence propagate(const EsnWeights& weights, const MultiSeries& y, const Vector& h0, std::size_t t_start,
                        std::size_t t_end);
StateSequence propagate(const EsnWeights& weights, const MultiSeries& y, const Conceptor& conceptor,
                        const Vector& h0, std::size_t t_start, std::size_t t_end);

/// Conceptor from a T_train x N matrix of states (one state per row).
Conceptor compute_conceptor(const Matrix& h_train, double alpha);

/// Ridge readout W^o (d x N) mapping states (rows of h) to targets (rows of y).
Matrix ridge_readout(const Matrix& h, const Matrix& y, double lambda);

// ---------------------------------------------------------------------------
// Hyperparameter selection

/// Seed of reservoir r among the candidates of size n; shared by the washout
/// and aperture searches so both see the same networks.
std::uint64_t network_seed(std::uint64_t master, std::size_t n, std::size_t r);

struct ScalingOptions {
    std::vector<double> c_input_grid{0.2, 0.6, 1.0, 1.4};
    std::vector<double> c_bias_grid{0.1, 0.3, 0.5};
    double rho = kDefaultSpectralRadius;
    std::size_t n = 0; // 0 selects 10 d
    std::size_t initializations = kDefaultInitializations;
    std::size_t t_wash = 50;
    double lambda = kDefaultRidge;
    double density = 0.0;
    std::uint64_t seed = 0;
};

struct ScalingCell {
    ScalingConfig config;
    double nrmse = 0.0;
};

struct ScalingSelection {
    ScalingConfig best;
    std::size_t best_index = 0;
    std::vector<ScalingCell> cells; // c_input major, c_bias minor
};

/// Grid search over input and bias scalings by mean readout NRMSE of raw
/// states. Network r uses the same seed in every cell.
ScalingSelection select_scaling(const MultiSeries& y, std::size_t t_train, const ScalingOptions& options = {});

struct WashoutOptions {
    std::size_t initializations = kDefaultInitializations;
    double eps_wash = 1e-6;
    double density = 0.0;
    std::uint64_t seed = 0;
};

struct WashoutResult {
    std::size_t t_wash = 0;
    std::vector<EsnWeights> networks;
};

/// First t at which reservoirs started from all-zeros and all-ones states
/// agree within eps_wash in every unit of every network.
WashoutResult washout_length(const MultiSeries& y, const ScalingConfig& scaling, std::size_t n,
                             const WashoutOptions& options = {});

struct FitOptions {
    std::size_t initializations = kDefaultInitializations;
    double lambda = kDefaultRidge;
    std::size_t n_cap_factor = 1000; // N may not exceed n_cap_factor * d
    double eps_wash = 1e-6;
    double density = 0.0;
    std::optional<std::size_t> t_wash; // fixed washout; otherwise searched per N
    std::uint64_t seed = 0;
};

struct FitStep {
    std::size_t n = 0;
    double alpha = 0.0;
    std::size_t t_wash = 0;
    double nrmse = 0.0;
};

struct FitResult {
    EsnHyperparams params;
    double nrmse = 0.0;
    std::vector<FitStep> steps;
};

/// Aperture ladder alpha = N * 10^(k/2). The ladder advances while
/// alpha <= 100 N, after which N grows and alpha restarts at N.
double aperture_for_step(std::size_t n, int ladder_step);
inline constexpr int kLastLadderStep = 4;

/// Growth rule for the reservoir size once the aperture ladder is exhausted.
std::size_t grow_reservoir(std::size_t n, std::size_t d);

/// Mean NRMSE of conceptor-filtered readouts for the given networks.
double filtered_readout_nrmse(const std::vector<EsnWeights>& networks, const MultiSeries& y, std::size_t t_wash,
                              std::size_t t_train, double alpha, double lambda);

/// Escalates (N, alpha) from (10 d, 10 d) until the filtered readout NRMSE
/// meets eps_train. Throws FitError when N passes the cap.
FitResult fit_hyperparams(const MultiSeries& y, std::size_t t_train, const ScalingConfig& scaling, double eps_train,
                          const FitOptions& options = {});

} // namespace ccp::esn
