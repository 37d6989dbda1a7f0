#include "ccp/simgen.hpp"

#include "ccp/error.hpp"
#include "ccp/esn.hpp"
#include "ccp/random.hpp"

#include <cmath>
#include <numbers>

namespace ccp::simgen {

namespace {

constexpr std::size_t kDims = 2;
constexpr int kMaxRescales = 100;
constexpr int kMaxRedraws = 20;
constexpr double kVarTolerance = 0.02;

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

void check_change_point(const ChangePoint& tau, std::size_t t_total) {
    if (tau) require(*tau >= 1 && *tau < t_total, "change point must lie in [1, T)");
}

bool after_change(std::size_t t, const ChangePoint& tau) { return tau && t > *tau; }

} // namespace

double companion_radius(const std::vector<Matrix>& lags) {
    require(!lags.empty(), "companion_radius: no lag matrices");
    const auto d = lags.front().rows();
    const auto p = static_cast<Eigen::Index>(lags.size());
    Matrix companion = Matrix::Zero(d * p, d * p);
    for (Eigen::Index k = 0; k < p; ++k) companion.block(0, k * d, d, d) = lags[static_cast<std::size_t>(k)];
    if (p > 1) companion.block(d, 0, d * (p - 1), d * (p - 1)).setIdentity();
    return esn::spectral_radius(companion);
}

std::vector<Matrix> random_var_coefficients(std::size_t order, std::size_t d, double rho_target, double tol,
                                            std::uint64_t seed) {
    require(order >= 1 && d >= 1, "random_var_coefficients: order and dimension must be positive");
    require(rho_target > 0.0 && rho_target < 1.0, "random_var_coefficients: rho must lie in (0, 1)");
    require(tol > 0.0, "random_var_coefficients: tolerance must be positive");

    for (int redraw = 0; redraw < kMaxRedraws; ++redraw) {
        Rng rng(redraw == 0 ? seed : derive_seed(seed, {static_cast<std::uint64_t>(redraw)}));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<Matrix> lags(order, Matrix(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
        for (auto& a : lags)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);

        for (int attempt = 0; attempt < kMaxRescales; ++attempt) {
            const double radius = companion_radius(lags);
            if (!(radius > 1e-12)) break;
            if (std::abs(radius - rho_target) <= tol) return lags;
            const double factor = rho_target / radius;
            for (auto& a : lags) a *= factor;
        }
    }
    throw InvariantError("random_var_coefficients: could not reach the target spectral radius");
}

LabeledSeries gen_var(std::size_t order, double rho_before, std::optional<double> rho_after, ChangePoint tau,
                      std::uint64_t seed, const GenOptions& options) {
    check_change_point(tau, options.t_total);
    require(!tau || rho_after.has_value(), "gen_var: a change point needs an after-change radius");

    const auto before = random_var_coefficients(order, kDims, rho_before, kVarTolerance, derive_seed(seed, {1}));
    const auto after = tau ? random_var_coefficients(order, kDims, *rho_after, kVarTolerance, derive_seed(seed, {2}))
                           : before;

    Rng rng(derive_seed(seed, {3}));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(kDims);

    std::vector<Vector> history(order, Vector::Constant(d, options.initial_value)); // history[k] = x_{t-1-k}
    Matrix out(static_cast<Eigen::Index>(options.t_total), d);
    const std::size_t steps = options.burn_in + options.t_total;
    for (std::size_t step = 1; step <= steps; ++step) {
        const bool burning = step <= options.burn_in;
        const std::size_t t = burning ? 0 : step - options.burn_in;
        const auto& lags = (!burning && after_change(t, tau)) ? after : before;
        Vector x = Vector::Zero(d);
        for (std::size_t k = 0; k < order; ++k) x += lags[k] * history[k];
        for (Eigen::Index i = 0; i < d; ++i) x(i) += options.noise_scale * normal(rng);
        for (std::size_t k = order - 1; k > 0; --k) history[k] = history[k - 1];
        history[0] = x;
        if (!burning) out.row(static_cast<Eigen::Index>(t - 1)) = x.transpose();
    }
    return {MultiSeries(std::move(out)), tau, {}};
}

double periodic_phase(std::size_t t, double omega_before, double omega_after, ChangePoint tau) {
    const auto tt = static_cast<double>(t);
    if (!after_change(t, tau)) return omega_before * tt;
    const auto tc = static_cast<double>(*tau);
    return omega_before * tc + omega_after * (tt - tc);
}

LabeledSeries gen_periodic(double omega_before, std::optional<double> omega_after, ChangePoint tau,
                           std::uint64_t seed, const GenOptions& options) {
    check_change_point(tau, options.t_total);
    require(omega_before > 0.0, "gen_periodic: frequency must be positive");
    require(!tau || (omega_after && *omega_after > 0.0), "gen_periodic: a change point needs a positive new frequency");
    const double w_after = omega_after.value_or(omega_before);

    Rng rng(derive_seed(seed, {3}));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(static_cast<Eigen::Index>(options.t_total), static_cast<Eigen::Index>(kDims));
    for (std::size_t t = 1; t <= options.t_total; ++t) {
        const double omega = after_change(t, tau) ? w_after : omega_before;
        const double phase = periodic_phase(t, omega_before, w_after, tau);
        const auto row = static_cast<Eigen::Index>(t - 1);
        out(row, 0) = std::sin(phase) + options.noise_scale * normal(rng);
        out(row, 1) = std::sin(phase + omega * std::numbers::pi / 2.0) + options.noise_scale * normal(rng);
    }
    return {MultiSeries(std::move(out)), tau, {}};
}

LabeledSeries gen_ou(OuParams before, OuParams after, ChangePoint tau, std::uint64_t seed, const GenOptions& options) {
    check_change_point(tau, options.t_total);
    for (const auto& p : {before, after}) {
        require(p.theta >= 0.0, "gen_ou: theta must be nonnegative");
        require(p.theta < 2.0, "gen_ou: theta * dt >= 2 makes the discretization unstable");
        require(p.lambda >= 0.0, "gen_ou: lambda must be nonnegative");
    }

    Rng rng(derive_seed(seed, {3}));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(static_cast<Eigen::Index>(options.t_total), static_cast<Eigen::Index>(kDims));
    double x[kDims] = {options.initial_value, options.initial_value};
    const std::size_t steps = options.burn_in + options.t_total;
    for (std::size_t step = 1; step <= steps; ++step) {
        const bool burning = step <= options.burn_in;
        const std::size_t t = burning ? 0 : step - options.burn_in;
        const OuParams& p = (!burning && after_change(t, tau)) ? after : before;
        for (std::size_t i = 0; i < kDims; ++i) x[i] = x[i] - p.theta * x[i] + p.lambda * normal(rng);
        if (!burning) {
            for (std::size_t i = 0; i < kDims; ++i) out(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(i)) = x[i];
        }
    }
    return {MultiSeries(std::move(out)), tau, {}};
}

LabeledSeries gen_white_noise(WhiteNoiseParams before, WhiteNoiseParams after, ChangePoint tau, std::uint64_t seed,
                              const GenOptions& options) {
    check_change_point(tau, options.t_total);
    for (const auto& p : {before, after}) {
        require(p.sigma > 0.0, "gen_white_noise: sigma must be positive");
        require(std::abs(p.rho) < p.sigma * p.sigma, "gen_white_noise: covariance is not positive definite");
    }

    Rng rng(derive_seed(seed, {3}));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(static_cast<Eigen::Index>(options.t_total), static_cast<Eigen::Index>(kDims));
    for (std::size_t t = 1; t <= options.t_total; ++t) {
        const WhiteNoiseParams& p = after_change(t, tau) ? after : before;
        // Cholesky factor of [[s^2, rho], [rho, s^2]].
        const double l21 = p.rho / p.sigma;
        const double l22 = std::sqrt(p.sigma * p.sigma - l21 * l21);
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        const auto row = static_cast<Eigen::Index>(t - 1);
        out(row, 0) = p.mu + p.sigma * z1;
        out(row, 1) = p.mu + l21 * z1 + l22 * z2;
    }
    return {MultiSeries(std::move(out)), tau, {}};
}

const std::vector<ScenarioSpec>& catalog() {
    static const std::vector<ScenarioSpec> entries = [] {
        std::vector<ScenarioSpec> v;
        auto var = [&](int order, char letter, double rb, std::optional<double> ra) {
            ScenarioSpec s;
            s.id = std::to_string(order) + letter;
            s.kind = order == 1 ? ProcessKind::var1 : ProcessKind::var2;
            s.has_change = ra.has_value();
            s.rho_before = rb;
            s.rho_after = ra.value_or(rb);
            s.description = "VAR(" + std::to_string(order) + ") rho " + std::to_string(rb).substr(0, 3) + " -> " +
                            (ra ? std::to_string(*ra).substr(0, 3) : std::string("NC"));
            v.push_back(s);
        };
        for (int order : {1, 2}) {
            var(order, 'a', 0.5, 0.5);
            var(order, 'b', 0.5, 0.8);
            var(order, 'c', 0.8, 0.5);
            var(order, 'd', 0.8, 0.8);
            var(order, 'e', 0.5, std::nullopt);
            var(order, 'f', 0.8, std::nullopt);
        }

        auto periodic = [&](char letter, std::optional<double> wa, const char* text) {
            ScenarioSpec s;
            s.id = std::string("3") + letter;
            s.kind = ProcessKind::periodic;
            s.has_change = wa.has_value();
            s.omega_before = 1.0;
            s.omega_after = wa.value_or(1.0);
            s.description = text;
            v.push_back(s);
        };
        periodic('a', 0.5, "periodic omega 1 -> 0.5");
        periodic('b', 0.8, "periodic omega 1 -> 0.8");
        periodic('c', 1.2, "periodic omega 1 -> 1.2");
        periodic('d', 1.5, "periodic omega 1 -> 1.5");
        periodic('e', std::nullopt, "periodic omega 1 -> NC");

        auto ou = [&](char letter, OuParams b, std::optional<OuParams> a, const char* text) {
            ScenarioSpec s;
            s.id = std::string("4") + letter;
            s.kind = ProcessKind::ou;
            s.has_change = a.has_value();
            s.ou_before = b;
            s.ou_after = a.value_or(b);
            s.description = text;
            v.push_back(s);
        };
        ou('a', {0.5, 0.5}, OuParams{0.0, 0.5}, "OU theta 0.5 -> 0; lambda 0.5");
        ou('b', {0.5, 0.5}, OuParams{1.0, 0.5}, "OU theta 0.5 -> 1; lambda 0.5");
        ou('c', {1.0, 0.5}, OuParams{0.0, 0.5}, "OU theta 1 -> 0; lambda 0.5");
        ou('d', {1.0, 0.5}, OuParams{0.5, 0.5}, "OU theta 1 -> 0.5; lambda 0.5");
        ou('e', {0.5, 0.5}, OuParams{0.5, 0.2}, "OU theta 0.5; lambda 0.5 -> 0.2");
        ou('f', {0.5, 0.5}, OuParams{0.5, 0.8}, "OU theta 0.5; lambda 0.5 -> 0.8");
        ou('g', {0.5, 0.5}, OuParams{0.5, 1.0}, "OU theta 0.5; lambda 0.5 -> 1");
        ou('h', {0.5, 0.5}, std::nullopt, "OU theta 0.5; lambda 0.5 -> NC");
        ou('i', {1.0, 0.5}, std::nullopt, "OU theta 1; lambda 0.5 -> NC");

        auto wn = [&](char letter, WhiteNoiseParams b, std::optional<WhiteNoiseParams> a, const char* text) {
            ScenarioSpec s;
            s.id = std::string("5") + letter;
            s.kind = ProcessKind::white_noise;
            s.has_change = a.has_value();
            s.wn_before = b;
            s.wn_after = a.value_or(b);
            s.description = text;
            v.push_back(s);
        };
        const WhiteNoiseParams base{0.0, 1.0, 0.0};
        wn('a', base, WhiteNoiseParams{0.5, 1.0, 0.0}, "white noise mu 0 -> 0.5");
        wn('b', base, WhiteNoiseParams{0.8, 1.0, 0.0}, "white noise mu 0 -> 0.8");
        wn('c', base, WhiteNoiseParams{1.0, 1.0, 0.0}, "white noise mu 0 -> 1");
        wn('d', base, WhiteNoiseParams{0.0, 0.5, 0.0}, "white noise sigma 1 -> 0.5");
        wn('e', base, WhiteNoiseParams{0.0, 0.8, 0.0}, "white noise sigma 1 -> 0.8");
        wn('f', base, WhiteNoiseParams{0.0, 1.2, 0.0}, "white noise sigma 1 -> 1.2");
        wn('g', base, WhiteNoiseParams{0.0, 1.5, 0.0}, "white noise sigma 1 -> 1.5");
        wn('h', base, WhiteNoiseParams{0.0, 1.0, 0.8}, "white noise rho 0 -> 0.8");
        wn('i', base, std::nullopt, "white noise mu, rho = 0; sigma = 1 -> NC");
        return v;
    }();
    return entries;
}

const ScenarioSpec& find_scenario(std::string_view id) {
    for (const auto& s : catalog()) {
        if (s.id == id) return s;
    }
    throw InputError("unknown scenario id '" + std::string(id) + "'");
}

LabeledSeries scenario(std::string_view id, std::uint64_t seed, const GenOptions& options) {
    const ScenarioSpec& spec = find_scenario(id);
    require(options.t_total > kTauMax, "scenario: series length must exceed the largest change point");

    ChangePoint tau;
    if (spec.has_change) {
        Rng rng(derive_seed(seed, {stream::simulation}));
        std::uniform_int_distribution<std::size_t> draw(kTauMin, kTauMax);
        tau = draw(rng);
    }
    const auto gen_seed = derive_seed(seed, {stream::simulation, 1});

    LabeledSeries out = [&] {
        switch (spec.kind) {
        case ProcessKind::var1:
        case ProcessKind::var2: {
            const std::size_t order = spec.kind == ProcessKind::var1 ? 1 : 2;
            const std::optional<double> after = spec.has_change ? std::optional<double>(spec.rho_after) : std::nullopt;
            return gen_var(order, spec.rho_before, after, tau, gen_seed, options);
        }
        case ProcessKind::periodic: {
            const std::optional<double> after = spec.has_change ? std::optional<double>(spec.omega_after) : std::nullopt;
            return gen_periodic(spec.omega_before, after, tau, gen_seed, options);
        }
        case ProcessKind::ou:
            return gen_ou(spec.ou_before, spec.ou_after, tau, gen_seed, options);
        case ProcessKind::white_noise:
            return gen_white_noise(spec.wn_before, spec.wn_after, tau, gen_seed, options);
        }
        throw InvariantError("scenario: unhandled process kind");
    }();
    out.scenario_id = spec.id;
    return out;
}

} // namespace ccp::simgen
