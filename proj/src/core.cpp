#include "rtopk/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rtopk {

std::uint64_t Rng::next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw InputError("Rng::below: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    Rng r(base ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    return r.next_u64();
}

Permutation::Permutation(std::vector<std::size_t> rank_to_item)
    : rank_to_item_(std::move(rank_to_item)), item_to_rank_(rank_to_item_.size(), SIZE_MAX) {
    const std::size_t m = rank_to_item_.size();
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t item = rank_to_item_[r];
        if (item >= m || item_to_rank_[item] != SIZE_MAX)
            throw InputError("Permutation: entries are not a bijection on 0..m-1");
        item_to_rank_[item] = r;
    }
}

Permutation Permutation::from_one_based(std::initializer_list<std::size_t> ranks) {
    std::vector<std::size_t> v;
    v.reserve(ranks.size());
    for (std::size_t x : ranks) {
        if (x == 0) throw InputError("Permutation: 1-based entries must be >= 1");
        v.push_back(x - 1);
    }
    return Permutation(std::move(v));
}

Permutation Permutation::identity(std::size_t m) {
    std::vector<std::size_t> v(m);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return Permutation(std::move(v));
}

std::string Permutation::item_rank_label() const {
    std::string out;
    for (std::size_t item = 0; item < size(); ++item) {
        if (size() > 9 && item > 0) out += '-';
        out += std::to_string(item_to_rank_[item] + 1);
    }
    return out;
}

RelevanceVector::RelevanceVector(std::vector<int> grades, int max_grade)
    : grades_(std::move(grades)), max_grade_(max_grade) {
    if (max_grade_ < 1) throw DomainError("RelevanceVector: max_grade must be >= 1");
    for (int g : grades_)
        if (g < 0 || g > max_grade_)
            throw DomainError("RelevanceVector: grade " + std::to_string(g) + " outside 0.." +
                              std::to_string(max_grade_));
}

RelevanceVector RelevanceVector::from_string(const std::string& digits, int max_grade) {
    std::vector<int> g;
    for (char c : digits) {
        if (c < '0' || c > '9') throw InputError("RelevanceVector: non-digit in '" + digits + "'");
        g.push_back(c - '0');
    }
    return RelevanceVector(std::move(g), max_grade);
}

bool RelevanceVector::is_binary() const noexcept {
    return std::all_of(grades_.begin(), grades_.end(), [](int g) { return g == 0 || g == 1; });
}

int RelevanceVector::l1() const noexcept {
    return std::accumulate(grades_.begin(), grades_.end(), 0);
}

std::string RelevanceVector::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < grades_.size(); ++i) {
        if (max_grade_ > 9 && i > 0) out += '-';
        out += std::to_string(grades_[i]);
    }
    return out;
}

TopKFeedback observe_top_k(const Permutation& perm, const RelevanceVector& r, std::size_t k) {
    if (perm.size() != r.size()) throw InputError("observe_top_k: size mismatch");
    if (k == 0 || k > perm.size()) throw InputError("observe_top_k: k must be in 1..m");
    TopKFeedback fb{perm, k, std::vector<int>(k)};
    for (std::size_t j = 0; j < k; ++j) fb.revealed[j] = r[perm.item_at(j)];
    return fb;
}

Permutation argsort_desc(std::span<const double> s, Rng& rng) {
    for (double x : s)
        if (!std::isfinite(x)) throw InputError("argsort_desc: non-finite score");
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

    bool ties = false;
    for (std::size_t r = 1; r < idx.size() && !ties; ++r) ties = s[idx[r]] == s[idx[r - 1]];
    if (ties) {
        // Random keys give every ordering of a tied group the same probability.
        std::vector<std::uint64_t> key(s.size());
        for (auto& k : key) k = rng.next_u64();
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (s[a] != s[b]) return s[a] > s[b];
            return key[a] != key[b] ? key[a] < key[b] : a < b;
        });
    }
    return Permutation(std::move(idx));
}

std::vector<Permutation> enumerate_permutations(std::size_t m) {
    if (m > 8) throw CapacityError("enumerate_permutations: m > 8");
    std::vector<std::size_t> v(m);
    std::iota(v.begin(), v.end(), std::size_t{0});
    std::vector<Permutation> out;
    do {
        out.emplace_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

std::vector<RelevanceVector> enumerate_relevance(std::size_t m, int n) {
    if (n < 1) throw DomainError("enumerate_relevance: n must be >= 1");
    double count = std::pow(static_cast<double>(n + 1), static_cast<double>(m));
    if (count > 1e7) throw CapacityError("enumerate_relevance: too many vectors");
    std::vector<RelevanceVector> out;
    std::vector<int> g(m, 0);
    out.reserve(static_cast<std::size_t>(count));
    while (true) {
        out.emplace_back(g, n);
        bool advanced = false;
        for (std::size_t pos = m; pos-- > 0;) {
            if (g[pos] < n) {
                ++g[pos];
                advanced = true;
                break;
            }
            g[pos] = 0;
        }
        if (!advanced) return out;
    }
}

}  // namespace rtopk
