#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rtopk/core.hpp"

namespace rtopk {

// Binary relevance stream: every round, each coordinate of a fixed true
// vector flips independently with probability flip_prob.
class CorruptionStream {
public:
    CorruptionStream(RelevanceVector truth, double flip_prob, std::uint64_t seed);

    RelevanceVector next();
    std::vector<RelevanceVector> take(std::size_t T);
    const RelevanceVector& truth() const noexcept { return truth_; }
    double flip_prob() const noexcept { return flip_; }

private:
    RelevanceVector truth_;
    double flip_;
    Rng rng_;
};

// Binary vector with `ones` relevant items at positions drawn from rng.
RelevanceVector random_truth(std::size_t m, std::size_t ones, Rng& rng);

// Truth positions and flips both derive from seed.
CorruptionStream make_simulated_stream(std::size_t m, std::size_t ones, double flip_prob, std::uint64_t seed);
std::vector<RelevanceVector> simulated_stream(std::size_t m, std::size_t ones, double flip_prob, std::size_t T,
                                              std::uint64_t seed);

// Two distributions over binary R in {0,1}^3 with equal means but different
// NDCG-optimal rankings.
struct DistributionPair {
    std::vector<RelevanceVector> support;  // 000,110,101,011,100,010,001,111
    std::vector<double> p;
    std::vector<double> p_tilde;
};

DistributionPair impossibility_pair();

struct IndistinguishabilityReport {
    DistributionPair pair;
    std::array<double, 3> mean_r_p{};
    std::array<double, 3> mean_r_p_tilde{};
    std::array<double, 3> norm_gain_p{};        // E[G(R)/Z(R)] under p
    std::array<double, 3> norm_gain_p_tilde{};  // and under p_tilde
    Permutation order_p;                        // argsort of norm_gain_p
    Permutation order_p_tilde;
    bool argmax_differs = false;
};

IndistinguishabilityReport indistinguishability_report();

// P(R(pi_s(1)) = 1) for R drawn from dist over support, computed exactly.
double top_relevance_probability(const std::vector<RelevanceVector>& support, const std::vector<double>& dist,
                                 std::span<const double> s);

}  // namespace rtopk
