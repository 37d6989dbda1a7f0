#pragma once

#include "ccp/series.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccp::simgen {

inline constexpr std::size_t kDefaultLength = 1000;
inline constexpr std::size_t kBurnIn = 200;
inline constexpr std::size_t kTauMin = 181;
inline constexpr std::size_t kTauMax = 999;
inline constexpr double kNoiseScale = 0.5;

/// Change point location, or nullopt for a stationary series.
using ChangePoint = std::optional<std::size_t>;

struct LabeledSeries {
    MultiSeries series;
    ChangePoint truth;
    std::string scenario_id;
};

/// Common knobs shared by the generators.
struct GenOptions {
    std::size_t t_total = kDefaultLength;
    std::size_t burn_in = kBurnIn;
    double noise_scale = kNoiseScale;
    double initial_value = 0.0; // start of the burn-in for recursive processes
};

/// Spectral radius of the companion matrix of VAR lag matrices.
double companion_radius(const std::vector<Matrix>& lags);

/// Gaussian lag matrices jointly rescaled until the companion radius lies
/// within tol of rho_target.
std::vector<Matrix> random_var_coefficients(std::size_t order, std::size_t d, double rho_target, double tol,
                                            std::uint64_t seed);

/// VAR(order) in two dimensions with lag matrices of radius rho_before up to
/// tau and freshly drawn matrices of radius rho_after afterwards.
LabeledSeries gen_var(std::size_t order, double rho_before, std::optional<double> rho_after, ChangePoint tau,
                      std::uint64_t seed, const GenOptions& options = {});

/// Phase of the periodic process at time t; continuous across tau.
double periodic_phase(std::size_t t, double omega_before, double omega_after, ChangePoint tau);

/// sin(phase) and sin(phase + omega pi / 2) plus Gaussian noise.
LabeledSeries gen_periodic(double omega_before, std::optional<double> omega_after, ChangePoint tau,
                           std::uint64_t seed, const GenOptions& options = {});

struct OuParams {
    double theta = 0.5;  // mean reversion
    double lambda = 0.5; // volatility
};

/// Two independent Euler-Maruyama OU channels with unit step:
/// x_{t+1} = x_t - theta x_t + lambda eps_t.
LabeledSeries gen_ou(OuParams before, OuParams after, ChangePoint tau, std::uint64_t seed,
                     const GenOptions& options = {});

struct WhiteNoiseParams {
    double mu = 0.0;
    double sigma = 1.0;
    double rho = 0.0; // off-diagonal covariance
};

/// Bivariate Gaussian N(mu 1, sigma^2 I + rho J) switching at tau.
LabeledSeries gen_white_noise(WhiteNoiseParams before, WhiteNoiseParams after, ChangePoint tau, std::uint64_t seed,
                              const GenOptions& options = {});

enum class ProcessKind { var1, var2, periodic, ou, white_noise };

struct ScenarioSpec {
    std::string id;
    ProcessKind kind = ProcessKind::white_noise;
    bool has_change = true;
    // Parameters before and after the change; unused fields stay at defaults.
    double rho_before = 0.0, rho_after = 0.0;
    double omega_before = 1.0, omega_after = 1.0;
    OuParams ou_before, ou_after;
    WhiteNoiseParams wn_before, wn_after;
    std::string description;
};

/// Every catalog entry, in id order.
const std::vector<ScenarioSpec>& catalog();

/// Throws InputError for an unknown id.
const ScenarioSpec& find_scenario(std::string_view id);

/// Draws tau uniformly in [181, 999] (none for no-change ids) and generates
/// the series.
LabeledSeries scenario(std::string_view id, std::uint64_t seed, const GenOptions& options = {});

} // namespace ccp::simgen
