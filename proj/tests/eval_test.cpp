#include "ccp/error.hpp"
#include "ccp/eval.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace ccp;
using namespace ccp::eval;

namespace {

RunRecord record(std::size_t truth, std::size_t tau_hat, double p) {
    RunRecord r;
    r.scenario_id = "1b";
    r.truth = truth;
    r.tau_hat = tau_hat;
    r.p = p;
    r.t0 = 180;
    r.t_total = 1000;
    return r;
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("segment labels") {
    CHECK(segment_labels(13, 10, 15) == std::vector<int>{0, 0, 0, 1, 1});
    CHECK(segment_labels(15, 10, 15) == std::vector<int>{0, 0, 0, 0, 0});
    CHECK_THROWS_AS(segment_labels(10, 10, 15), InputError);
}

TEST_CASE("adjusted rand index examples") {
    const std::vector<int> a{0, 0, 1, 1};
    const std::vector<int> b{0, 1, 0, 1};
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(-0.5));
    CHECK(adjusted_rand_index(a, a) == 1.0);
    const std::vector<int> relabeled{7, 7, 3, 3};
    CHECK(adjusted_rand_index(a, relabeled) == 1.0);
    const std::vector<int> one(4, 0);
    CHECK(adjusted_rand_index(one, one) == 1.0);
}

TEST_CASE("adjusted rand index matches pair counting") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> len(2, 40);
    std::uniform_int_distribution<int> k(1, 4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(len(rng));
        std::uniform_int_distribution<int> la(0, k(rng) - 1), lb(0, k(rng) - 1);
        std::vector<int> a(n), b(n);
        for (auto& x : a) x = la(rng);
        for (auto& x : b) x = lb(rng);
        CHECK(adjusted_rand_index(a, b) == doctest::Approx(oracle::ari_pairs(a, b)).epsilon(1e-12));
        CHECK(adjusted_rand_index(a, b) == adjusted_rand_index(b, a));
    }
}

TEST_CASE("shuffled labels average to zero") {
    std::mt19937_64 rng(2);
    std::vector<int> a(200);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<int>(i % 3);
    double total = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<int> b(a);
        std::shuffle(b.begin(), b.end(), rng);
        total += adjusted_rand_index(a, b);
    }
    CHECK(std::abs(total / 300.0) < 0.005);
}

TEST_CASE("non-detections are scored at the end of the series") {
    const auto hit = record(500, 510, 0.01);
    const auto miss = record(500, 510, 0.2);
    CHECK(scored_estimate(hit, 0.05) == 510);
    CHECK(scored_estimate(miss, 0.05) == 1000);
    CHECK(record_ari(miss, 0.05) == 0.0);
    CHECK(record_ari(record(500, 500, 0.0), 0.05) == 1.0);
    CHECK(scored_estimate(record(500, 510, 0.05), 0.05) == 510);
}

TEST_CASE("error cdf jumps at the scaled error") {
    // |510 - 428| / 820 = 0.1
    const std::vector<RunRecord> records{record(428, 510, 0.0)};
    const std::vector<double> deltas{0.0, 0.09, 0.1, 0.2};
    CHECK(error_cdf(records, deltas, 0.05) == std::vector<double>{0, 0, 1, 1});
}

TEST_CASE("a missed change at 181 scores the full window") {
    const std::vector<RunRecord> records{record(181, 300, 0.5), record(999, 999, 0.0)};
    const auto curve = error_cdf(records, default_deltas(), 0.05);
    CHECK(curve.front() == 0.5);
    CHECK(curve.back() == 0.5); // 819 / 820 exceeds every delta
    CHECK(std::is_sorted(curve.begin(), curve.end()));
}

TEST_CASE("default delta grid") {
    const auto d = default_deltas();
    CHECK(d.size() == 101);
    CHECK(d.front() == 0.0);
    CHECK(d.back() == 0.5);
    CHECK(d[50] == doctest::Approx(0.25));
}

TEST_CASE("type 1 rate") {
    std::vector<RunRecord> records;
    for (double p : {0.01, 0.5, 0.05, 0.9}) {
        RunRecord r;
        r.p = p;
        records.push_back(r);
    }
    CHECK(type1_rate(records, 0.05) == 0.5);
}

} // TEST_SUITE
