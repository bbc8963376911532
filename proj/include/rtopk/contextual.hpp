#pragma once

#include <ostream>
#include <vector>

#include "rtopk/datasets.hpp"
#include "rtopk/surrogates.hpp"

namespace rtopk {

struct ContextualConfig {
    SurrogateId surrogate = SurrogateId::kl();
    double c_gamma = 0.1;  // gamma_t = c_gamma / t^(1/3), capped at gamma_cap
    double c_eta = 0.01;   // eta_t = c_eta / t^(2/3)
    double gamma_cap = 0.45;
    double U = 1.0;
    // Multiplies gamma inside the estimator denominator on rounds where the
    // observed top-k differs from the deterministic ranking. 1 disables it.
    double mismatch_boost = 10.0;
    std::size_t m = 0;
    std::size_t d = 0;
    // Feedback depth; 0 selects the surrogate's requirement.
    std::size_t k = 0;

    std::size_t feedback_depth() const noexcept { return k == 0 ? surrogate.required_k(m) : k; }
    double gamma_at(std::size_t t) const;
    double eta_at(std::size_t t) const;
    void validate() const;
};

struct RankerState {
    Eigen::VectorXd w;
    std::size_t t = 1;  // 1-based round about to be played

    static RankerState initial(std::size_t d) { return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)), 1}; }
};

struct ActResult {
    Eigen::VectorXd s;        // deterministic score X w
    Permutation sigma;        // argsort of s
    Eigen::VectorXd s_tilde;  // score actually used
    Permutation sigma_tilde;
    bool explored = false;
    double gamma = 0.0;
};

// Plays the exploration mixture: X w with probability 1 - gamma_t, a fresh
// uniform [0,1]^m score otherwise.
ActResult act(const RankerState& state, const FeatureMatrix& x, const ContextualConfig& cfg, Rng& rng);

struct UpdateResult {
    RankerState state;
    Eigen::VectorXd z;  // gradient estimate in weight space
    bool boosted = false;
};

// One projected OGD step on the unbiased gradient estimate. Gain surrogates
// (SmoothDCG) ascend instead of descend.
UpdateResult update(const RankerState& state, const FeatureMatrix& x, const TopKFeedback& feedback,
                    const ActResult& played, const ContextualConfig& cfg);

// w scaled by min(1, U / ||w||).
Eigen::VectorXd project_to_ball(const Eigen::VectorXd& w, double U);

struct ContextualRecord {
    std::size_t round = 0;
    bool explored = false;
    bool boosted = false;
    double surrogate_loss = 0.0;
    double ndcg10 = 0.0;
    double avg_ndcg10 = 0.0;
};

struct ContextualLog {
    std::vector<ContextualRecord> rounds;
    Eigen::VectorXd final_w;

    double final_avg_ndcg10() const { return rounds.empty() ? 0.0 : rounds.back().avg_ndcg10; }
    void write_csv(std::ostream& out) const;
};

// Round t plays query order[t]. The order is fixed in advance, so the
// adversary is oblivious to the learner.
ContextualLog run_contextual(const ContextualConfig& cfg, const std::vector<QueryRecord>& queries,
                             const std::vector<std::size_t>& order, Rng& rng);

// Full-information OGD on the ListNet cross-entropy, eta_t = c_eta / sqrt(t).
ContextualLog run_listnet_baseline(const std::vector<QueryRecord>& queries, const std::vector<std::size_t>& order,
                                   double U, double c_eta, Rng& rng);

// Uniformly random rankings; learns nothing.
ContextualLog run_random_baseline(const std::vector<QueryRecord>& queries, const std::vector<std::size_t>& order,
                                  Rng& rng);

// Uniform-with-replacement query order of length T.
std::vector<std::size_t> sample_query_order(std::size_t num_queries, std::size_t T, std::uint64_t seed);

// Sum of surrogate values of the fixed weight w over the first `upto` rounds.
double fixed_weight_loss(const SurrogateId& id, const Eigen::VectorXd& w, const std::vector<QueryRecord>& queries,
                         const std::vector<std::size_t>& order, std::size_t upto);

// Approximate best fixed weight in the U-ball by projected full-gradient
// descent, halving the step whenever the objective fails to decrease.
Eigen::VectorXd best_fixed_weight(const SurrogateId& id, const std::vector<QueryRecord>& queries,
                                  const std::vector<std::size_t>& order, double U, std::size_t passes = 50);

}  // namespace rtopk
