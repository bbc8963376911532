#include <cmath>

#include "doctest.h"
#include "rtopk/measures.hpp"
#include "test_util.hpp"

using namespace rtopk;

namespace {
constexpr double kTol = 1e-12;
const double kLog3 = std::log2(3.0);

Permutation P(std::initializer_list<std::size_t> v) { return Permutation::from_one_based(v); }
RelevanceVector R(const char* s, int n = 1) { return RelevanceVector::from_string(s, n); }
}  // namespace

TEST_CASE("sum_loss") {
    CHECK(sum_loss(P({1, 2, 3}), R("000")) == 0.0);
    CHECK(sum_loss(P({2, 1, 3}), R("011")) == 4.0);
    CHECK(sum_loss(P({3, 2, 1}), R("111")) == 6.0);
}

TEST_CASE("pairwise_loss") {
    CHECK(pairwise_loss(P({1, 2, 3}), R("110")) == 0.0);
    CHECK(pairwise_loss(P({1, 2, 3}), R("011")) == 2.0);
    CHECK_THROWS_AS(pairwise_loss(P({1, 2}), R("20", 2)), DomainError);
}

TEST_CASE("property: PL and SumLoss share regret (exhaustive, m <= 5)") {
    for (std::size_t m = 1; m <= 5; ++m) {
        const auto perms = enumerate_permutations(m);
        for (const auto& r : enumerate_relevance(m, 1)) {
            const double base_pl = pairwise_loss(perms[0], r);
            const double base_sl = sum_loss(perms[0], r);
            for (const auto& p : perms) REQUIRE(pairwise_loss(p, r) - base_pl == sum_loss(p, r) - base_sl);
        }
    }
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const std::size_t m = 2 + rng.below(6);
        const auto a = testutil::random_perm(m, rng), b = testutil::random_perm(m, rng);
        const auto r = testutil::random_relevance(m, 1, rng);
        CHECK(pairwise_loss(a, r) - pairwise_loss(b, r) == sum_loss(a, r) - sum_loss(b, r));
    }
}

TEST_CASE("dcg") {
    CHECK(std::abs(dcg(P({1, 2, 3}), R("001")) - 0.5) < kTol);
    CHECK(std::abs(dcg(P({1, 2, 3}), R("011")) - (0.5 + 1.0 / kLog3)) < kTol);
    CHECK(std::abs(dcg(P({1, 2, 3}), R("011")) - 1.13093) < 1e-5);
    CHECK(std::abs(dcg(P({1, 2}), R("20", 2)) - 3.0) < kTol);
}

TEST_CASE("dcg loss vector of sigma1 over all binary R (m=3)") {
    const double expect[8] = {0, 0.5, 1 / kLog3, 0.5 + 1 / kLog3, 1, 1.5, 1 + 1 / kLog3, 1.5 + 1 / kLog3};
    const auto rs = enumerate_relevance(3, 1);
    for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(dcg(P({1, 2, 3}), rs[j]) - expect[j]) < kTol);
}

TEST_CASE("ndcg") {
    CHECK(std::abs(ndcg(P({1, 2, 3}), R("011")) - (1 + kLog3 / 2) / (1 + kLog3)) < kTol);
    CHECK(std::abs(ndcg(P({1, 2, 3}), R("011")) - 0.69343) < 1e-5);
    Rng rng(4);
    for (int i = 0; i < 20; ++i) {
        const auto p = testutil::random_perm(4, rng);
        CHECK(ndcg(p, R("0000")) == 1.0);
        CHECK(std::abs(ndcg(p, R("2222", 2)) - 1.0) < kTol);
    }
}

TEST_CASE("ndcg difference between sigma1 and sigma6 (m=3)") {
    const double c = kLog3 / (2 * (1 + kLog3));
    const double expect[8] = {0, -0.5, 0, -c, 0.5, 0, c, 0};
    const auto rs = enumerate_relevance(3, 1);
    for (std::size_t j = 0; j < 8; ++j)
        CHECK(std::abs(ndcg(P({1, 2, 3}), rs[j]) - ndcg(P({3, 2, 1}), rs[j]) - expect[j]) < kTol);
}

TEST_CASE("ndcg_at_n") {
    // Only the top two ranks count.
    CHECK(std::abs(ndcg_at_n(P({1, 2, 3}), R("001"), 2) - 0.0) < kTol);
    CHECK(std::abs(ndcg_at_n(P({3, 1, 2}), R("001"), 1) - 1.0) < kTol);
    CHECK(ndcg_at_n(P({1, 2, 3}), R("000"), 2) == 1.0);
    // A cutoff beyond m behaves like full NDCG.
    CHECK(std::abs(ndcg_at_n(P({1, 2, 3}), R("011"), 10) - ndcg(P({1, 2, 3}), R("011"))) < kTol);
}

TEST_CASE("precision_at_n") {
    CHECK(precision_at_n(P({1, 2, 3}), R("011"), 2) == 1.0);
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        const auto p = testutil::random_perm(5, rng);
        const auto r = testutil::random_relevance(5, 1, rng);
        CHECK(precision_at_n(p, r, 5) == r.l1());
    }
    // Item 3 is on top and irrelevant, so the value is 0.
    CHECK(precision_at_n(P({3, 2, 1}), R("100"), 1) == 0.0);
    CHECK_THROWS_AS(precision_at_n(P({1, 2}), R("12", 2), 1), DomainError);
}

TEST_CASE("ap") {
    CHECK(std::abs(ap(P({1, 2, 3}), R("001")) - 1.0 / 3) < kTol);
    CHECK(std::abs(ap(P({1, 2, 3}), R("011")) - 7.0 / 12) < kTol);
    CHECK(ap(P({2, 3, 1, 4}), R("0110")) == 1.0);
    CHECK(ap(P({1, 2, 3}), R("000")) == 1.0);
}

TEST_CASE("ap loss vectors of sigma1 and sigma6 (m=3)") {
    const double s1[8] = {1, 1.0 / 3, 0.5, 7.0 / 12, 1, 5.0 / 6, 1, 1};
    const double s6[8] = {1, 1, 0.5, 1, 1.0 / 3, 5.0 / 6, 7.0 / 12, 1};
    const auto rs = enumerate_relevance(3, 1);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(std::abs(ap(P({1, 2, 3}), rs[j]) - s1[j]) < kTol);
        CHECK(std::abs(ap(P({3, 2, 1}), rs[j]) - s6[j]) < kTol);
    }
}

TEST_CASE("auc") {
    CHECK(std::abs(auc(P({1, 2, 3, 4}), R("0001")) - 1.0) < kTol);
    CHECK(std::abs(auc(P({1, 2, 3, 4}), R("0101")) - 0.75) < kTol);
    CHECK(auc(P({1, 2, 3, 4}), R("1100")) == 0.0);
    CHECK(auc(P({1, 2, 3, 4}), R("0000")) == 0.0);
    CHECK(auc(P({1, 2, 3, 4}), R("1111")) == 0.0);
}

TEST_CASE("auc loss vector of sigma1 (m=4) in the appendix column order") {
    const char* order[16] = {"0000", "0001", "0010", "0100", "1000", "0011", "0101", "1001",
                             "0110", "1010", "1100", "0111", "1011", "1101", "1110", "1111"};
    const double expect[16] = {0, 1, 2.0 / 3, 1.0 / 3, 0, 1, 0.75, 0.5, 0.5, 0.25, 0, 1, 2.0 / 3, 1.0 / 3, 0, 0};
    for (int j = 0; j < 16; ++j) CHECK(std::abs(auc(P({1, 2, 3, 4}), R(order[j])) - expect[j]) < kTol);
}

TEST_CASE("property: ranges of bounded measures") {
    Rng rng(13);
    for (int i = 0; i < 500; ++i) {
        const std::size_t m = 1 + rng.below(7);
        const auto p = testutil::random_perm(m, rng);
        const auto rb = testutil::random_relevance(m, 1, rng);
        const auto rg = testutil::random_relevance(m, 4, rng);
        CHECK(ndcg(p, rg) >= 0.0);
        CHECK(ndcg(p, rg) <= 1.0 + kTol);
        CHECK(ap(p, rb) >= 0.0);
        CHECK(ap(p, rb) <= 1.0 + kTol);
        CHECK(auc(p, rb) >= 0.0);
        CHECK(auc(p, rb) <= 1.0 + kTol);
        CHECK(dcg(p, rg) >= 0.0);
        const std::size_t n = 1 + rng.below(m);
        const double prec = precision_at_n(p, rb, n);
        CHECK(prec >= 0.0);
        CHECK(prec <= static_cast<double>(n));
        CHECK(prec == std::floor(prec));
    }
}

TEST_CASE("property: sorting by relevance gives NDCG 1") {
    Rng rng(17);
    for (int i = 0; i < 300; ++i) {
        const std::size_t m = 1 + rng.below(8);
        const auto r = testutil::random_relevance(m, 4, rng);
        const std::vector<double> s(r.grades().begin(), r.grades().end());
        CHECK(std::abs(ndcg(argsort_desc(s, rng), r) - 1.0) < kTol);
    }
}

TEST_CASE("property: dcg factors as f(sigma) . g(R)") {
    Rng rng(19);
    for (int i = 0; i < 300; ++i) {
        const std::size_t m = 1 + rng.below(8);
        const auto p = testutil::random_perm(m, rng);
        const auto r = testutil::random_relevance(m, 3, rng);
        double dot = 0.0;
        for (std::size_t item = 0; item < m; ++item) {
            const double f = 1.0 / std::log2(1.0 + static_cast<double>(p.rank_of(item) + 1));
            const double g = std::pow(2.0, r[item]) - 1.0;
            dot += f * g;
        }
        CHECK(std::abs(dcg(p, r) - dot) < 1e-10);
    }
}

TEST_CASE("MeasureId parsing and orientation") {
    CHECK(MeasureId::parse("dcg").kind == MeasureKind::DCG);
    CHECK(MeasureId::parse("precision@3").cutoff == 3);
    CHECK(MeasureId::parse("NDCG@10").kind == MeasureKind::NDCGAtN);
    CHECK_THROWS_AS(MeasureId::parse("err"), ConfigError);
    CHECK_THROWS_AS(MeasureId::parse("precision@0"), ConfigError);
    CHECK(MeasureId::dcg().is_gain());
    CHECK_FALSE(MeasureId::sum_loss().is_gain());
    CHECK(evaluate_as_loss(MeasureId::dcg(), P({1, 2, 3}), R("001")) == -0.5);
}
