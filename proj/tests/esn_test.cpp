#include "ccp/error.hpp"
#include "ccp/esn.hpp"
#include "ccp/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/QR>

using namespace ccp;
using namespace ccp::esn;

namespace {

Matrix column(std::initializer_list<double> v) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

MultiSeries sine_series(std::size_t t, std::size_t d) {
    Matrix y(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) = std::sin(0.3 * static_cast<double>(i) + 1.1 * j);
    return MultiSeries(std::move(y));
}

} // namespace

TEST_SUITE("esn") {

TEST_CASE("nrmse of a constant forecast against a two-point series is sqrt(2)") {
    // var y = 1, var yhat = 0, mse = 1.
    CHECK(nrmse(column({0.0, 2.0}), column({1.0, 1.0})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("nrmse averages over dimensions") {
    Matrix y(2, 2), yhat(2, 2);
    y << 0.0, 1.0, 2.0, 3.0;
    yhat << 1.0, 0.0, 1.0, 4.0;
    // column 0 gives sqrt(2); column 1: mse 1, variances 1 and 4, so sqrt(1 / 2.5).
    CHECK(nrmse(y, yhat) == doctest::Approx(0.5 * (std::sqrt(2.0) + std::sqrt(0.4))));
    CHECK(nrmse(y, y) == 0.0);
}

TEST_CASE("nrmse reports the dimension with zero variance") {
    Matrix y(3, 2), yhat(3, 2);
    y << 1, 5, 2, 5, 3, 5;
    yhat = y;
    try {
        (void)nrmse(y, yhat);
        FAIL("expected DegenerateVarianceError");
    } catch (const DegenerateVarianceError& e) {
        CHECK(e.dimension() == 1);
    }
}

TEST_CASE("init_weights is deterministic and scales the recurrent matrix") {
    const ScalingConfig scaling{0.6, 0.3, 0.8};
    const auto a = init_weights(11, 50, 3, scaling, 0.2);
    const auto b = init_weights(11, 50, 3, scaling, 0.2);
    const auto c = init_weights(12, 50, 3, scaling, 0.2);
    CHECK(Matrix(a.w_h) == Matrix(b.w_h));
    CHECK(a.w_i == b.w_i);
    CHECK(a.b == b.b);
    CHECK(Matrix(a.w_h) != Matrix(c.w_h));
    CHECK(a.w_h.nonZeros() == 500);
    CHECK(spectral_radius(Matrix(a.w_h)) == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(a.size() == 50);
    CHECK(a.input_dims() == 3);
}

TEST_CASE("default density keeps ten nonzeros per row") {
    CHECK(default_density(5) == 1.0);
    CHECK(default_density(100) == doctest::Approx(0.1));
    const auto w = init_weights(3, 100, 2, ScalingConfig{});
    CHECK(w.w_h.nonZeros() == 1000);
}

TEST_CASE("init_weights with zero spectral radius drops the recurrence") {
    const auto w = init_weights(4, 20, 1, ScalingConfig{1.0, 0.1, 0.0});
    CHECK(Matrix(w.w_h).isZero(0.0));
    CHECK_THROWS_AS(init_weights(4, 20, 1, ScalingConfig{1.0, 0.1, 1.0}), InputError);
    CHECK_THROWS_AS(init_weights(4, 20, 1, ScalingConfig{-1.0, 0.1, 0.5}), InputError);
}

TEST_CASE("propagate replays the tanh recursion") {
    const auto w = init_weights(5, 6, 2, ScalingConfig{1.0, 0.3, 0.8});
    const auto y = sine_series(10, 2);
    const Vector h0 = Vector::LinSpaced(6, -0.5, 0.5);
    const auto run = propagate(w, y, h0, 3, 8);
    REQUIRE(run.states.rows() == 6);

    const Matrix wh(w.w_h);
    Vector prev = h0;
    for (std::size_t t = 3; t <= 8; ++t) {
        Vector h(6);
        for (Eigen::Index i = 0; i < 6; ++i) {
            double acc = w.b(i);
            for (Eigen::Index j = 0; j < 6; ++j) acc += wh(i, j) * prev(j);
            for (Eigen::Index j = 0; j < 2; ++j) acc += w.w_i(i, j) * y.at(t)(j);
            h(i) = std::tanh(acc);
        }
        CHECK((run.states.row(static_cast<Eigen::Index>(t - 3)).transpose() - h).cwiseAbs().maxCoeff() < 1e-14);
        prev = h;
    }
    CHECK(run.filtered == run.states);
}

TEST_CASE("identity conceptor leaves the run unchanged and the zero conceptor cuts the recurrence") {
    const auto w = init_weights(6, 8, 1, ScalingConfig{1.0, 0.3, 0.8});
    const auto y = sine_series(20, 1);
    const Vector h0 = Vector::Zero(8);
    const auto raw = propagate(w, y, h0, 1, 20);
    const auto same = propagate(w, y, Conceptor{Matrix::Identity(8, 8), 1.0}, h0, 1, 20);
    CHECK((raw.states - same.states).cwiseAbs().maxCoeff() < 1e-15);

    const auto cut = propagate(w, y, Conceptor{Matrix::Zero(8, 8), 1.0}, h0, 1, 20);
    for (std::size_t t = 1; t <= 20; ++t) {
        const Vector expect = (w.w_i * y.at(t).transpose() + w.b).array().tanh().matrix();
        CHECK((cut.states.row(static_cast<Eigen::Index>(t - 1)).transpose() - expect).cwiseAbs().maxCoeff() < 1e-15);
    }
    CHECK(cut.filtered.isZero(0.0));
}

TEST_CASE("conceptor of the identity second moment") {
    const Matrix h = std::sqrt(4.0) * Matrix::Identity(4, 4); // R = I
    CHECK((compute_conceptor(h, 1.0).c - 0.5 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((compute_conceptor(h, 1e4).c - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("conceptor matches the eigendecomposition oracle") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix h = oracle::random_states(rng, 40, 12);
        for (double alpha : {0.5, 3.0, 40.0}) {
            const Matrix c = compute_conceptor(h, alpha).c;
            CHECK((c - oracle::conceptor_eigen(h, alpha)).cwiseAbs().maxCoeff() < 1e-8);
            CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("rank deficient states still yield a conceptor") {
    std::mt19937_64 rng(5);
    const Matrix h = oracle::random_states(rng, 3, 10); // rank 3 in ten dimensions
    const Matrix c = compute_conceptor(h, 1e9).c;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    CHECK(eig.eigenvalues().minCoeff() > -1e-9);
    CHECK(eig.eigenvalues().maxCoeff() < 1.0 + 1e-9);
    CHECK_THROWS_AS(compute_conceptor(h, 0.0), InputError);
}

TEST_CASE("ridge readout recovers an exact linear map") {
    std::mt19937_64 rng(8);
    const Matrix h = oracle::random_states(rng, 200, 6);
    Matrix w_true(2, 6);
    w_true << 1, -2, 0.5, 0, 3, 1, 0.1, 0.2, 0.3, -0.4, 0.5, -0.6;
    const Matrix y = h * w_true.transpose();
    CHECK((ridge_readout(h, y, 1e-12) - w_true).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ridge readout agrees with the augmented least squares oracle") {
    std::mt19937_64 rng(9);
    const Matrix h = oracle::random_states(rng, 50, 8);
    const Matrix y = oracle::random_states(rng, 50, 3);
    const double lambda = 0.7;
    Matrix a(58, 8);
    a << h, std::sqrt(lambda) * Matrix::Identity(8, 8);
    Matrix rhs = Matrix::Zero(58, 3);
    rhs.topRows(50) = y;
    const Matrix x = a.colPivHouseholderQr().solve(rhs);
    CHECK((ridge_readout(h, y, lambda) - x.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    // Heavier shrinkage gives a smaller readout.
    CHECK(ridge_readout(h, y, 100.0).norm() < ridge_readout(h, y, 0.01).norm());
}

TEST_CASE("select_scaling returns the grid argmin and replays a cell") {
    std::mt19937_64 rng(30);
    const auto y = oracle::gaussian_series(rng, 200, 2);
    ScalingOptions opts;
    opts.initializations = 3;
    opts.seed = 77;
    const auto sel = select_scaling(y, 100, opts);
    REQUIRE(sel.cells.size() == 12);
    for (const auto& cell : sel.cells) CHECK(sel.cells[sel.best_index].nrmse <= cell.nrmse);
    CHECK(sel.best == sel.cells[sel.best_index].config);
    CHECK(sel.cells[1].config.c_input == 0.2);
    CHECK(sel.cells[1].config.c_bias == 0.3);

    // Replay cell 7 from its definition.
    const auto& cell = sel.cells[7];
    double sum = 0.0;
    const Matrix targets = y.window(51, 150);
    for (std::size_t r = 0; r < 3; ++r) {
        const auto w = init_weights(derive_seed(77, {stream::scaling, r}), 20, 2, cell.config);
        const Matrix h = propagate(w, y, Vector::Zero(20), 1, 150).states.bottomRows(100);
        sum += nrmse(targets, h * ridge_readout(h, targets, 1e-4).transpose());
    }
    CHECK(cell.nrmse == doctest::Approx(sum / 3.0).epsilon(1e-12));

    const auto again = select_scaling(y, 100, opts);
    CHECK(again.best_index == sel.best_index);
    CHECK(again.cells[5].nrmse == sel.cells[5].nrmse);
}

TEST_CASE("washout without recurrence converges after one step") {
    const auto y = sine_series(50, 1);
    CHECK(washout_length(y, ScalingConfig{1.0, 0.1, 0.0}, 10).t_wash == 1);
}

TEST_CASE("washout length is the first agreement time") {
    const auto y = sine_series(400, 2);
    WashoutOptions opts;
    opts.initializations = 2;
    opts.seed = 3;
    const ScalingConfig scaling{1.0, 0.3, 0.8};
    const auto res = washout_length(y, scaling, 20, opts);
    REQUIRE(res.networks.size() == 2);

    auto gap_at = [&](std::size_t t) {
        double gap = 0.0;
        for (const auto& w : res.networks) {
            const auto a = propagate(w, y, Vector::Zero(20), 1, t).states.bottomRows(1);
            const auto b = propagate(w, y, Vector::Ones(20), 1, t).states.bottomRows(1);
            gap = std::max(gap, (a - b).cwiseAbs().maxCoeff());
        }
        return gap;
    };
    CHECK(gap_at(res.t_wash) < 1e-6);
    CHECK(gap_at(res.t_wash - 1) >= 1e-6);

    opts.eps_wash = 1e-3;
    CHECK(washout_length(y, scaling, 20, opts).t_wash <= res.t_wash);
}

TEST_CASE("aperture ladder and growth rule") {
    CHECK(aperture_for_step(20, 0) == 20.0);
    CHECK(aperture_for_step(20, 2) == doctest::Approx(200.0));
    CHECK(aperture_for_step(20, 5) == doctest::Approx(20.0 * std::pow(10.0, 2.5)));
    CHECK(grow_reservoir(10, 1) == 20);
    CHECK(grow_reservoir(20, 2) == 40);
    CHECK(grow_reservoir(30, 3) == 90);
}

TEST_CASE("a loose target stops at the first iterate") {
    const auto y = sine_series(300, 2);
    FitOptions opts;
    opts.initializations = 2;
    opts.seed = 4;
    const auto fit = fit_hyperparams(y, 100, ScalingConfig{1.0, 0.3, 0.8}, 0.99, opts);
    REQUIRE(fit.steps.size() == 1);
    CHECK(fit.params.n == 20);
    CHECK(fit.params.alpha == 20.0);
    CHECK(fit.nrmse <= 0.99);
}

TEST_CASE("fit walks the ladder and meets the target") {
    std::mt19937_64 rng(41);
    const auto y = oracle::gaussian_series(rng, 400, 1);
    FitOptions opts;
    opts.initializations = 2;
    opts.seed = 6;
    opts.t_wash = 40;
    const double eps = 0.02;
    const ScalingConfig scaling{1.0, 0.3, 0.8};
    const auto fit = fit_hyperparams(y, 120, scaling, eps, opts);
    CHECK(fit.nrmse <= eps);
    CHECK(fit.params.t_wash == 40);
    CHECK(fit.steps.size() > 1);

    // Every earlier step missed the target, the ladder order is respected and
    // each recorded error replays.
    std::size_t n = 10;
    int step = 0;
    for (std::size_t i = 0; i < fit.steps.size(); ++i) {
        const auto& s = fit.steps[i];
        CHECK(s.n == n);
        CHECK(s.alpha == aperture_for_step(n, step));
        if (i + 1 < fit.steps.size()) CHECK(s.nrmse > eps);
        std::vector<EsnWeights> nets;
        for (std::size_t r = 0; r < 2; ++r) nets.push_back(init_weights(network_seed(6, n, r), n, 1, scaling));
        CHECK(filtered_readout_nrmse(nets, y, 40, 120, s.alpha, 1e-4) == doctest::Approx(s.nrmse).epsilon(1e-12));
        if (step <= kLastLadderStep) {
            ++step;
        } else {
            n = grow_reservoir(n, 1);
            step = 0;
        }
    }
}

TEST_CASE("fit gives up past the reservoir cap") {
    std::mt19937_64 rng(42);
    const auto y = oracle::gaussian_series(rng, 200, 1);
    FitOptions opts;
    opts.initializations = 1;
    opts.n_cap_factor = 20;
    opts.t_wash = 20;
    CHECK_THROWS_AS(fit_hyperparams(y, 100, ScalingConfig{}, 1e-9, opts), FitError);
}

} // TEST_SUITE
