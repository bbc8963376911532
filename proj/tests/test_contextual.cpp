#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "rtopk/contextual.hpp"
#include "rtopk/harness.hpp"
#include "rtopk/measures.hpp"
#include "test_util.hpp"

using namespace rtopk;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

ContextualConfig base_config(SurrogateId id, std::size_t m, std::size_t d) {
    ContextualConfig c;
    c.surrogate = id;
    c.m = m;
    c.d = d;
    return c;
}

}  // namespace

TEST_CASE("schedules and validation") {
    auto c = base_config(SurrogateId::kl(), 5, 3);
    CHECK(c.gamma_at(1) == doctest::Approx(0.1));
    CHECK(c.gamma_at(8) == doctest::Approx(0.05));
    CHECK(c.eta_at(8) == doctest::Approx(0.0025));
    c.c_gamma = 0.49;
    c.gamma_cap = 0.45;
    CHECK(c.gamma_at(1) == 0.45);
    CHECK_NOTHROW(c.validate());
    c.c_gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.c_gamma = 0.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    auto ln = base_config(SurrogateId::listnet(), 5, 3);
    CHECK_THROWS_AS(ln.validate(), ConfigError);
    auto svm = base_config(SurrogateId::ranksvm(), 5, 3);
    CHECK(svm.feedback_depth() == 2);
    svm.k = 1;
    CHECK_THROWS_AS(svm.validate(), ConfigError);
}

TEST_CASE("act without exploration plays the deterministic score") {
    auto c = base_config(SurrogateId::squared(), 4, 2);
    c.c_gamma = 0.0;
    Rng rng(1);
    const Eigen::MatrixXd x = testutil::unit_rows(4, 2, rng);
    RankerState st{vec({0.3, -0.7}), 5};
    for (int i = 0; i < 100; ++i) {
        const auto a = act(st, x, c, rng);
        CHECK_FALSE(a.explored);
        CHECK(a.s_tilde == x * st.w);
        CHECK(a.sigma_tilde == a.sigma);
    }
    CHECK_THROWS_AS(act(st, Eigen::MatrixXd::Zero(3, 2), c, rng), InputError);
}

TEST_CASE("act induces the exploration mixture over rankings") {
    auto c = base_config(SurrogateId::squared(), 3, 2);
    c.c_gamma = 0.3;
    Rng rng(2);
    Eigen::MatrixXd x(3, 2);
    x << 1, 0, 0, 1, 0.5, 0.5;
    const RankerState st{vec({0.2, 0.9}), 1};
    const auto perms = enumerate_permutations(3);
    std::vector<int> counts(6, 0);
    const int n = 100000;
    Permutation det;
    for (int i = 0; i < n; ++i) {
        const auto a = act(st, x, c, rng);
        det = a.sigma;
        for (std::size_t j = 0; j < 6; ++j)
            if (perms[j] == a.sigma_tilde) ++counts[j];
    }
    for (std::size_t j = 0; j < 6; ++j) {
        const double p = 0.3 / 6 + (perms[j] == det ? 0.7 : 0.0);
        CHECK(std::abs(counts[j] - n * p) < 3 * std::sqrt(n * p * (1 - p)));
    }
}

TEST_CASE("update: zero estimate leaves w unchanged") {
    auto c = base_config(SurrogateId::kl(), 2, 2);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
    const RankerState st{vec({1, 0}), 1};
    Rng rng(3);
    c.c_gamma = 0.0;
    auto a = act(st, x, c, rng);
    a.gamma = 0.1;  // estimator denominators need a positive mixture weight
    const auto r = RelevanceVector::from_string("10", 1);
    const auto up = update(st, x, observe_top_k(a.sigma_tilde, r, 1), a, c);
    CHECK(up.z.norm() == 0.0);
    CHECK(up.state.w == st.w);
    CHECK(up.state.t == 2);
}

TEST_CASE("update: squared single round matches hand arithmetic") {
    auto c = base_config(SurrogateId::squared(), 2, 2);
    c.U = 10;
    c.c_eta = 0.01;
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
    const RankerState st{vec({0.2, 0.1}), 1};
    ActResult a;
    a.s = x * st.w;
    a.sigma = Permutation::identity(2);
    a.s_tilde = a.s;
    a.sigma_tilde = a.sigma;
    a.gamma = 0.1;
    const auto r = RelevanceVector::from_string("10", 1);
    const auto up = update(st, x, observe_top_k(a.sigma_tilde, r, 1), a, c);
    const double p = 1 - 0.1 + 0.1 / 2;
    const Eigen::VectorXd z = vec({2 * (0.2 - 1 / p), 0.2});
    CHECK((up.z - z).norm() < 1e-12);
    CHECK((up.state.w - (st.w - 0.01 * z)).norm() < 1e-12);
    CHECK_FALSE(up.boosted);

    // Feedback for a ranking that was not played.
    CHECK_THROWS_AS(update(st, x, observe_top_k(Permutation::from_one_based({2, 1}), r, 1), a, c), ContractError);
}

TEST_CASE("update: projection lands exactly on the ball") {
    auto c = base_config(SurrogateId::squared(), 2, 2);
    c.U = 0.5;
    c.c_eta = 100;
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
    const RankerState st{vec({0.2, 0.1}), 1};
    ActResult a;
    a.s = x * st.w;
    a.sigma = Permutation::identity(2);
    a.s_tilde = a.s;
    a.sigma_tilde = a.sigma;
    a.gamma = 0.1;
    const auto up = update(st, x, observe_top_k(a.sigma, RelevanceVector::from_string("10", 1), 1), a, c);
    CHECK(std::abs(up.state.w.norm() - 0.5) < 1e-12);
    CHECK(project_to_ball(vec({0.1, 0.1}), 1.0) == vec({0.1, 0.1}));
    CHECK(std::abs(project_to_ball(vec({3, 4}), 1.0).norm() - 1.0) < 1e-15);
}

TEST_CASE("update: boost flags exactly the mismatch rounds") {
    auto c = base_config(SurrogateId::ranksvm(), 5, 3);
    c.c_gamma = 0.45;
    Rng rng(4);
    const auto data = synthesize_contextual(10, 5, 3, 0.1, 7);
    RankerState st = RankerState::initial(3);
    st.w = vec({0.3, 0.2, -0.1});
    int boosted = 0;
    for (int i = 0; i < 500; ++i) {
        const auto& q = data.queries[static_cast<std::size_t>(i) % 10];
        const auto a = act(st, q.x, c, rng);
        const auto up = update(st, q.x, observe_top_k(a.sigma_tilde, q.r, 2), a, c);
        const bool mismatch =
            a.sigma_tilde.item_at(0) != a.sigma.item_at(0) || a.sigma_tilde.item_at(1) != a.sigma.item_at(1);
        CHECK(up.boosted == mismatch);
        boosted += up.boosted;
    }
    CHECK(boosted > 0);
}

TEST_CASE("property: conditional unbiasedness of the round estimate (boost off)") {
    Rng gen(5);
    for (const auto& id : {SurrogateId::squared(), SurrogateId::ranksvm(), SurrogateId::kl(), SurrogateId::smooth_dcg(0.5)}) {
        auto c = base_config(id, 5, 4);
        c.mismatch_boost = 1.0;
        c.c_gamma = 0.3;
        const Eigen::MatrixXd x = testutil::unit_rows(5, 4, gen);
        RankerState st = RankerState::initial(4);
        st.w = testutil::random_vector(4, -0.5, 0.5, gen);
        const auto r = testutil::random_relevance(5, 1, gen);
        const Eigen::VectorXd target = x.transpose() * gradient(id, x * st.w, r);
        testutil::MeanAccumulator acc(4);
        for (int i = 0; i < 100000; ++i) {
            const auto a = act(st, x, c, gen);
            acc.add(update(st, x, observe_top_k(a.sigma_tilde, r, c.feedback_depth()), a, c).z);
        }
        INFO(id.name());
        CHECK(acc.max_z(target) < 3.0);
    }
}

TEST_CASE("property: weights stay inside the U-ball on every round") {
    const auto data = synthesize_contextual(50, 6, 4, 0.1, 9);
    for (const auto& id : {SurrogateId::squared(), SurrogateId::ranksvm(), SurrogateId::kl(), SurrogateId::smooth_dcg()}) {
        auto c = base_config(id, 6, 4);
        c.c_eta = 5.0;
        c.U = 0.7;
        Rng rng(10);
        RankerState st = RankerState::initial(4);
        for (int t = 0; t < 400; ++t) {
            const auto& q = data.queries[rng.below(50)];
            const auto a = act(st, q.x, c, rng);
            st = update(st, q.x, observe_top_k(a.sigma_tilde, q.r, c.feedback_depth()), a, c).state;
            CHECK(st.w.norm() <= 0.7 + 1e-12);
        }
    }
}

TEST_CASE("property: expected cumulative surrogate regret grows sublinearly") {
    // Per-round expected loss given w_t: (1-gamma_t) F(w_t) + gamma_t E[phi(u, R)],
    // where F averages over the stream's queries and u is a uniform score.
    // Regret is taken against the offline best fixed weight and averaged over
    // seeds, which removes the sampling noise of a single trajectory.
    const std::size_t m = 5, d = 3, nq = 100, T = 20000, seeds = 10;
    const auto data = synthesize_contextual(nq, m, d, 0.1, 11);
    const auto order = sample_query_order(nq, T, 12);
    std::vector<std::size_t> every(nq);
    std::iota(every.begin(), every.end(), std::size_t{0});
    for (const auto& id : {SurrogateId::squared(), SurrogateId::kl(), SurrogateId::ranksvm()}) {
        auto c = base_config(id, m, d);
        c.mismatch_boost = 1.0;
        auto population = [&](const Eigen::VectorXd& w) {
            double f = 0.0;
            for (const auto& q : data.queries) f += value(id, q.x * w, q.r);
            return f / static_cast<double>(nq);
        };
        Rng u(99);
        double uniform_loss = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const auto& q = data.queries[u.below(nq)];
            uniform_loss += value(id, testutil::random_vector(m, 0, 1, u), q.r) / 20000.0;
        }
        const double best = population(best_fixed_weight(id, data.queries, every, c.U, 300));

        std::vector<double> ts(T), mean(T, 0.0);
        for (std::size_t seed = 0; seed < seeds; ++seed) {
            Rng rng(100 + seed);
            RankerState st = RankerState::initial(d);
            double cum = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                const double g = c.gamma_at(st.t);
                cum += (1 - g) * population(st.w) + g * uniform_loss - best;
                ts[t] = static_cast<double>(t + 1);
                mean[t] += cum / static_cast<double>(seeds);
                const auto& q = data.queries[order[t]];
                const auto a = act(st, q.x, c, rng);
                st = update(st, q.x, observe_top_k(a.sigma_tilde, q.r, c.feedback_depth()), a, c).state;
            }
        }
        REQUIRE(mean.back() > 0.0);
        const double slope = loglog_slope(ts, mean, T / 10.0, static_cast<double>(T));
        INFO(id.name() << " regret slope " << slope);
        CHECK(slope < 0.9);
    }
}

TEST_CASE("best_fixed_weight improves on the origin and respects U") {
    const auto data = synthesize_contextual(40, 6, 4, 0.1, 14);
    const auto order = sample_query_order(40, 300, 15);
    for (const auto& id : {SurrogateId::squared(), SurrogateId::kl(), SurrogateId::ranksvm(), SurrogateId::listnet()}) {
        const Eigen::VectorXd w = best_fixed_weight(id, data.queries, order, 1.0);
        CHECK(w.norm() <= 1.0 + 1e-12);
        CHECK(fixed_weight_loss(id, w, data.queries, order, 300) <
              fixed_weight_loss(id, Eigen::VectorXd::Zero(4), data.queries, order, 300));
    }
    CHECK_THROWS_AS(best_fixed_weight(SurrogateId::smooth_dcg(), data.queries, order, 1.0), ContractError);
}

TEST_CASE("baselines") {
    const auto data = synthesize_contextual(100, 10, 5, 0.1, 16);
    const auto order = sample_query_order(100, 4000, 17);
    Rng r1(1), r2(2), r3(3);
    const auto random = run_random_baseline(data.queries, order, r1);
    const auto listnet = run_listnet_baseline(data.queries, order, 1.0, 0.5, r2);
    auto c = base_config(SurrogateId::kl(), 10, 5);
    c.c_eta = 0.5;
    const auto kl = run_contextual(c, data.queries, order, r3);

    // Random stays flat; the full-information learner is best.
    CHECK(std::abs(random.rounds[1999].avg_ndcg10 - random.final_avg_ndcg10()) < 0.03);
    CHECK(listnet.final_avg_ndcg10() > random.final_avg_ndcg10() + 0.15);
    CHECK(listnet.final_avg_ndcg10() >= kl.final_avg_ndcg10() - 0.01);
    CHECK(kl.final_avg_ndcg10() > random.final_avg_ndcg10());
    for (const auto& rec : random.rounds) CHECK(rec.explored);
}

TEST_CASE("run logs are deterministic and well formed") {
    const auto data = synthesize_contextual(20, 5, 3, 0.1, 18);
    const auto order = sample_query_order(20, 300, 19);
    CHECK(order == sample_query_order(20, 300, 19));
    auto c = base_config(SurrogateId::smooth_dcg(), 5, 3);
    Rng a(4), b(4);
    std::ostringstream sa, sb;
    run_contextual(c, data.queries, order, a).write_csv(sa);
    run_contextual(c, data.queries, order, b).write_csv(sb);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("round,explored,boosted,surrogate_loss,avg_ndcg10\n", 0) == 0);
    CHECK_THROWS_AS(run_contextual(c, data.queries, {25}, a), InputError);
    CHECK_THROWS_AS(sample_query_order(0, 10, 1), InputError);
}
