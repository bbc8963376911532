#include "rtopk/adversary.hpp"

#include <numeric>

#include "rtopk/measures.hpp"

namespace rtopk {

CorruptionStream::CorruptionStream(RelevanceVector truth, double flip_prob, std::uint64_t seed)
    : truth_(std::move(truth)), flip_(flip_prob), rng_(seed) {
    if (!truth_.is_binary()) throw DomainError("corruption stream: truth must be binary");
    if (!(flip_prob >= 0.0 && flip_prob < 0.5)) throw ConfigError("corruption stream: flip_prob must lie in [0, 0.5)");
}

RelevanceVector CorruptionStream::next() {
    std::vector<int> g = truth_.grades();
    for (int& v : g)
        if (rng_.bernoulli(flip_)) v = 1 - v;
    return RelevanceVector(std::move(g), 1);
}

std::vector<RelevanceVector> CorruptionStream::take(std::size_t T) {
    std::vector<RelevanceVector> out;
    out.reserve(T);
    for (std::size_t t = 0; t < T; ++t) out.push_back(next());
    return out;
}

RelevanceVector random_truth(std::size_t m, std::size_t ones, Rng& rng) {
    if (ones > m) throw ConfigError("random_truth: ones > m");
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<int> g(m, 0);
    for (std::size_t j = 0; j < ones; ++j) {
        std::swap(idx[j], idx[j + rng.below(m - j)]);
        g[idx[j]] = 1;
    }
    return RelevanceVector(std::move(g), 1);
}

CorruptionStream make_simulated_stream(std::size_t m, std::size_t ones, double flip_prob, std::uint64_t seed) {
    Rng rng(seed);
    RelevanceVector truth = random_truth(m, ones, rng);
    return CorruptionStream(std::move(truth), flip_prob, rng.next_u64());
}

std::vector<RelevanceVector> simulated_stream(std::size_t m, std::size_t ones, double flip_prob, std::size_t T,
                                              std::uint64_t seed) {
    return make_simulated_stream(m, ones, flip_prob, seed).take(T);
}

DistributionPair impossibility_pair() {
    DistributionPair d;
    for (const char* s : {"000", "110", "101", "011", "100", "010", "001", "111"})
        d.support.push_back(RelevanceVector::from_string(s));
    d.p = {0.0, 0.1, 0.15, 0.05, 0.2, 0.3, 0.2, 0.0};
    d.p_tilde = {0.0, 0.3, 0.0, 0.0, 0.15, 0.15, 0.4, 0.0};
    return d;
}

namespace {

void expectations(const DistributionPair& d, const std::vector<double>& dist, std::array<double, 3>& mean,
                  std::array<double, 3>& norm_gain) {
    mean.fill(0.0);
    norm_gain.fill(0.0);
    for (std::size_t s = 0; s < d.support.size(); ++s) {
        const RelevanceVector& r = d.support[s];
        const double z = ideal_dcg(r);
        for (std::size_t i = 0; i < 3; ++i) {
            mean[i] += dist[s] * r[i];
            // Z(R) = 0 only for R = 000, whose gain is 0 as well.
            if (z > 0.0) norm_gain[i] += dist[s] * dcg_gain(r[i]) / z;
        }
    }
}

}  // namespace

IndistinguishabilityReport indistinguishability_report() {
    IndistinguishabilityReport rep;
    rep.pair = impossibility_pair();
    expectations(rep.pair, rep.pair.p, rep.mean_r_p, rep.norm_gain_p);
    expectations(rep.pair, rep.pair.p_tilde, rep.mean_r_p_tilde, rep.norm_gain_p_tilde);
    Rng tie_breaker(0);
    rep.order_p = argsort_desc(rep.norm_gain_p, tie_breaker);
    rep.order_p_tilde = argsort_desc(rep.norm_gain_p_tilde, tie_breaker);
    rep.argmax_differs = rep.order_p.item_at(0) != rep.order_p_tilde.item_at(0);
    return rep;
}

double top_relevance_probability(const std::vector<RelevanceVector>& support, const std::vector<double>& dist,
                                 std::span<const double> s) {
    if (support.size() != dist.size()) throw InputError("top_relevance_probability: size mismatch");
    // The ranking depends on s only, so ties are resolved once.
    Rng tie_breaker(0);
    const std::size_t top = argsort_desc(s, tie_breaker).item_at(0);
    double prob = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j)
        if (support[j][top] == 1) prob += dist[j];
    return prob;
}

}  // namespace rtopk
