#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "rtopk/errors.hpp"

namespace rtopk {

// SplitMix64. Every draw is a pure function of (seed, draw count), so a seed
// replays bit-identically on any platform. Rng is single-owner; parallel
// workers derive their own seeds instead of sharing one instance.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() noexcept;
    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    // Uniform integer on [0, n). Rejection sampling removes modulo bias.
    std::size_t below(std::size_t n);
    bool bernoulli(double p) noexcept { return uniform() < p; }
    // Standard normal via Box-Muller; the spare value is cached.
    double normal() noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Mixes a base seed with a stream index into a well-separated child seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

// Ranking over m items, stored 0-based. rank_to_item()[r] is the item at
// rank r (rank 0 is the top slot).
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<std::size_t> rank_to_item);
    // 1-based convenience constructor used by tests and docs: {2,3,1}.
    static Permutation from_one_based(std::initializer_list<std::size_t> ranks);
    static Permutation identity(std::size_t m);

    std::size_t size() const noexcept { return rank_to_item_.size(); }
    std::size_t item_at(std::size_t rank) const { return rank_to_item_.at(rank); }
    std::size_t rank_of(std::size_t item) const { return item_to_rank_.at(item); }
    const std::vector<std::size_t>& rank_to_item() const noexcept { return rank_to_item_; }
    const std::vector<std::size_t>& item_to_rank() const noexcept { return item_to_rank_; }
    Permutation inverse() const { return Permutation(item_to_rank_); }

    // Item->rank digits, 1-based, concatenated ("312"). This is how the game
    // tables label actions.
    std::string item_rank_label() const;

    friend bool operator==(const Permutation& a, const Permutation& b) {
        return a.rank_to_item_ == b.rank_to_item_;
    }

private:
    std::vector<std::size_t> rank_to_item_;
    std::vector<std::size_t> item_to_rank_;
};

class RelevanceVector {
public:
    RelevanceVector() = default;
    RelevanceVector(std::vector<int> grades, int max_grade);
    static RelevanceVector binary(std::initializer_list<int> grades) { return {grades, 1}; }
    // Parses a digit string such as "011".
    static RelevanceVector from_string(const std::string& digits, int max_grade = 1);

    std::size_t size() const noexcept { return grades_.size(); }
    int operator[](std::size_t item) const { return grades_[item]; }
    int max_grade() const noexcept { return max_grade_; }
    const std::vector<int>& grades() const noexcept { return grades_; }
    bool is_binary() const noexcept;
    int l1() const noexcept;
    std::string to_string() const;

    friend bool operator==(const RelevanceVector& a, const RelevanceVector& b) {
        return a.max_grade_ == b.max_grade_ && a.grades_ == b.grades_;
    }

private:
    std::vector<int> grades_;
    int max_grade_ = 1;
};

// Scores are plain doubles; argsort_desc validates finiteness.
using ScoreVector = std::vector<double>;

struct TopKFeedback {
    Permutation perm;
    std::size_t k = 0;
    std::vector<int> revealed;  // revealed[j] = R(perm(j))
};

// Reveals the grades of the top k items of perm.
TopKFeedback observe_top_k(const Permutation& perm, const RelevanceVector& r, std::size_t k);

// Items sorted by non-increasing score. Exact ties are broken uniformly at
// random with rng; without ties the rng is not consumed.
Permutation argsort_desc(std::span<const double> s, Rng& rng);

inline Permutation inverse(const Permutation& p) { return p.inverse(); }

// All m! permutations, lexicographic on rank_to_item. Guarded to m <= 8.
std::vector<Permutation> enumerate_permutations(std::size_t m);

// All (n+1)^m relevance vectors, lexicographic with item 0 most significant.
std::vector<RelevanceVector> enumerate_relevance(std::size_t m, int n);

}  // namespace rtopk
