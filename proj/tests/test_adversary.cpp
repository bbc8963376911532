#include <cmath>

#include "doctest.h"
#include "rtopk/adversary.hpp"
#include "rtopk/measures.hpp"
#include "test_util.hpp"

using namespace rtopk;

namespace {

// Binary normalized gain R(i) / IDCG(R), computed from scratch.
double norm_gain(const RelevanceVector& r, std::size_t i) {
    const std::size_t ones = static_cast<std::size_t>(r.l1());
    if (ones == 0) return 0.0;
    double z = 0.0;
    for (std::size_t j = 1; j <= ones; ++j) z += 1.0 / std::log2(1.0 + static_cast<double>(j));
    return r[i] / z;
}

}  // namespace

TEST_CASE("zero flip probability replays the truth") {
    auto s = make_simulated_stream(20, 5, 0.0, 3);
    CHECK(s.truth().l1() == 5);
    for (const auto& r : s.take(200)) CHECK(r == s.truth());
}

TEST_CASE("simulated truth has the requested weight") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = make_simulated_stream(20, 5, 0.1, seed);
        CHECK(s.truth().l1() == 5);
        CHECK(s.truth().is_binary());
    }
    Rng rng(1);
    CHECK(random_truth(6, 0, rng).l1() == 0);
    CHECK(random_truth(6, 6, rng).l1() == 6);
    CHECK_THROWS_AS(random_truth(3, 4, rng), ConfigError);
    CHECK_THROWS_AS(CorruptionStream(RelevanceVector::from_string("01", 1), 0.5, 1), ConfigError);
    CHECK_THROWS_AS(CorruptionStream(RelevanceVector::from_string("02", 2), 0.1, 1), DomainError);
}

TEST_CASE("flip frequency is binomial with the configured rate") {
    const std::size_t T = 100000;
    auto s = make_simulated_stream(20, 5, 0.1, 7);
    const auto truth = s.truth();
    std::vector<int> flips(20, 0);
    for (std::size_t t = 0; t < T; ++t) {
        const auto r = s.next();
        for (std::size_t i = 0; i < 20; ++i) flips[i] += r[i] != truth[i];
    }
    const double sd = std::sqrt(T * 0.1 * 0.9);
    for (int f : flips) CHECK(std::abs(f - 0.1 * T) < 3 * sd);
}

TEST_CASE("property: streams are stationary around the corrupted mean") {
    Rng gen(2);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t m = 3 + gen.below(10);
        const std::size_t ones = gen.below(m + 1);
        const double f = gen.uniform(0.0, 0.4);
        const auto stream = simulated_stream(m, ones, f, 20000, gen.next_u64());
        testutil::MeanAccumulator first(static_cast<Eigen::Index>(m)), second(static_cast<Eigen::Index>(m));
        for (std::size_t t = 0; t < stream.size(); ++t) {
            Eigen::VectorXd v(static_cast<Eigen::Index>(m));
            for (std::size_t i = 0; i < m; ++i) v(static_cast<Eigen::Index>(i)) = stream[t][i];
            (t < 10000 ? first : second).add(v);
        }
        // Both halves estimate the same per-coordinate mean, which is f or 1-f.
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
            const double mu = first.mean()(i) < 0.5 ? f : 1 - f;
            const double se = std::sqrt(f * (1 - f) / 10000.0);
            CHECK(std::abs(first.mean()(i) - mu) < 4 * se + 1e-12);
            CHECK(std::abs(second.mean()(i) - mu) < 4 * se + 1e-12);
        }
    }
}

TEST_CASE("streams are seed deterministic") {
    CHECK(simulated_stream(20, 5, 0.1, 300, 9) == simulated_stream(20, 5, 0.1, 300, 9));
    CHECK(simulated_stream(20, 5, 0.1, 300, 9) != simulated_stream(20, 5, 0.1, 300, 10));
}

TEST_CASE("impossibility pair matches the reference table") {
    const auto pair = impossibility_pair();
    const char* support[8] = {"000", "110", "101", "011", "100", "010", "001", "111"};
    const double p[8] = {0.0, 0.1, 0.15, 0.05, 0.2, 0.3, 0.2, 0.0};
    const double pt[8] = {0.0, 0.3, 0.0, 0.0, 0.15, 0.15, 0.4, 0.0};
    REQUIRE(pair.support.size() == 8);
    double sp = 0, spt = 0;
    for (int j = 0; j < 8; ++j) {
        CHECK(pair.support[static_cast<std::size_t>(j)].to_string() == support[j]);
        CHECK(pair.p[static_cast<std::size_t>(j)] == p[j]);
        CHECK(pair.p_tilde[static_cast<std::size_t>(j)] == pt[j]);
        sp += p[j];
        spt += pt[j];
    }
    CHECK(std::abs(sp - 1) < 1e-15);
    CHECK(std::abs(spt - 1) < 1e-15);
}

TEST_CASE("indistinguishability report") {
    const auto rep = indistinguishability_report();
    const double mean[3] = {0.45, 0.45, 0.4};
    const double ng_p[3] = {0.3533, 0.3920, 0.3226};
    const double ng_pt[3] = {0.3339, 0.3339, 0.4000};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(rep.mean_r_p[i] - mean[i]) < 1e-12);
        CHECK(std::abs(rep.mean_r_p_tilde[i] - mean[i]) < 1e-12);
        CHECK(std::abs(rep.norm_gain_p[i] - ng_p[i]) < 1e-3);
        CHECK(std::abs(rep.norm_gain_p_tilde[i] - ng_pt[i]) < 1e-3);

        // Independent recomputation.
        double a = 0, b = 0;
        for (std::size_t j = 0; j < 8; ++j) {
            a += rep.pair.p[j] * norm_gain(rep.pair.support[j], i);
            b += rep.pair.p_tilde[j] * norm_gain(rep.pair.support[j], i);
        }
        CHECK(std::abs(rep.norm_gain_p[i] - a) < 1e-12);
        CHECK(std::abs(rep.norm_gain_p_tilde[i] - b) < 1e-12);
    }
    CHECK(rep.order_p == Permutation::from_one_based({2, 1, 3}));
    CHECK(rep.order_p_tilde.item_at(0) == 2);
    CHECK(rep.argmax_differs);
}

TEST_CASE("property: the top item's relevance bit has the same law under both distributions") {
    const auto pair = impossibility_pair();
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
        std::vector<double> s(3);
        for (double& x : s) x = rng.normal();
        const double a = top_relevance_probability(pair.support, pair.p, s);
        const double b = top_relevance_probability(pair.support, pair.p_tilde, s);
        CHECK(std::abs(a - b) < 1e-12);
    }
    // The quantity is a mean coordinate, so it equals E[R] at the top item.
    const std::vector<double> s{0.0, 0.0, 1.0};
    CHECK(std::abs(top_relevance_probability(pair.support, pair.p, s) - 0.4) < 1e-12);
}
