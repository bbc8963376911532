#include "rtopk/measures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

namespace rtopk {

namespace {

void require_same_size(const Permutation& sigma, const RelevanceVector& r) {
    if (sigma.size() != r.size()) throw InputError("measure: permutation and relevance sizes differ");
}

void require_binary(const RelevanceVector& r, const char* who) {
    if (!r.is_binary()) throw DomainError(std::string(who) + ": requires binary relevance");
}

double log2_discount(std::size_t one_based_rank) {
    return std::log(1.0 + static_cast<double>(one_based_rank)) / std::log(2.0);
}

}  // namespace

bool MeasureId::is_gain() const noexcept {
    switch (kind) {
        case MeasureKind::SumLoss:
        case MeasureKind::PairwiseLoss:
        case MeasureKind::AUC:
            return false;
        default:
            return true;
    }
}

bool MeasureId::binary_only() const noexcept {
    return kind == MeasureKind::PairwiseLoss || kind == MeasureKind::PrecisionAtN ||
           kind == MeasureKind::AP || kind == MeasureKind::AUC;
}

std::string MeasureId::name() const {
    switch (kind) {
        case MeasureKind::SumLoss: return "sumloss";
        case MeasureKind::PairwiseLoss: return "pl";
        case MeasureKind::DCG: return "dcg";
        case MeasureKind::NDCG: return "ndcg";
        case MeasureKind::PrecisionAtN: return "precision@" + std::to_string(cutoff);
        case MeasureKind::AP: return "ap";
        case MeasureKind::AUC: return "auc";
        case MeasureKind::NDCGAtN: return "ndcg@" + std::to_string(cutoff);
    }
    return "?";
}

MeasureId MeasureId::parse(const std::string& text) {
    std::string t;
    for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto at = t.find('@');
    const std::string head = t.substr(0, at);
    std::size_t n = 0;
    if (at != std::string::npos) {
        try {
            n = std::stoul(t.substr(at + 1));
        } catch (const std::exception&) {
            throw ConfigError("measure: bad cutoff in '" + text + "'");
        }
        if (n == 0) throw ConfigError("measure: cutoff must be >= 1");
    }
    if (at == std::string::npos) {
        if (head == "sumloss") return sum_loss();
        if (head == "pl" || head == "pairwiseloss") return pairwise_loss();
        if (head == "dcg") return dcg();
        if (head == "ndcg") return ndcg();
        if (head == "ap") return ap();
        if (head == "auc") return auc();
    } else {
        if (head == "precision" || head == "p") return precision_at(n);
        if (head == "ndcg") return ndcg_at(n);
    }
    throw ConfigError("unknown measure '" + text + "'");
}

double sum_loss(const Permutation& sigma, const RelevanceVector& r) {
    require_same_size(sigma, r);
    double total = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        total += static_cast<double>(sigma.rank_of(i) + 1) * r[i];
    return total;
}

double pairwise_loss(const Permutation& sigma, const RelevanceVector& r) {
    require_same_size(sigma, r);
    require_binary(r, "pairwise_loss");
    double count = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r.size(); ++j)
            if (sigma.rank_of(i) < sigma.rank_of(j) && r[i] < r[j]) count += 1.0;
    return count;
}

double dcg_gain(int grade) { return std::ldexp(1.0, grade) - 1.0; }

double dcg(const Permutation& sigma, const RelevanceVector& r) {
    require_same_size(sigma, r);
    double total = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        total += dcg_gain(r[i]) / log2_discount(sigma.rank_of(i) + 1);
    return total;
}

double ideal_dcg(const RelevanceVector& r, std::size_t n) {
    std::vector<int> g = r.grades();
    std::sort(g.begin(), g.end(), std::greater<>());
    const std::size_t limit = n == 0 ? g.size() : std::min(n, g.size());
    double z = 0.0;
    for (std::size_t j = 0; j < limit; ++j) z += dcg_gain(g[j]) / log2_discount(j + 1);
    return z;
}

double ndcg(const Permutation& sigma, const RelevanceVector& r) {
    const double z = ideal_dcg(r);
    if (z == 0.0) return 1.0;
    return dcg(sigma, r) / z;
}

double ndcg_at_n(const Permutation& sigma, const RelevanceVector& r, std::size_t n) {
    require_same_size(sigma, r);
    if (n == 0) throw InputError("ndcg_at_n: n must be >= 1");
    const double z = ideal_dcg(r, n);
    if (z == 0.0) return 1.0;
    const std::size_t limit = std::min(n, r.size());
    double total = 0.0;
    for (std::size_t j = 0; j < limit; ++j) total += dcg_gain(r[sigma.item_at(j)]) / log2_discount(j + 1);
    return total / z;
}

double precision_at_n(const Permutation& sigma, const RelevanceVector& r, std::size_t n) {
    require_same_size(sigma, r);
    require_binary(r, "precision_at_n");
    if (n == 0 || n > r.size()) throw InputError("precision_at_n: n must be in 1..m");
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += r[sigma.item_at(j)];
    return total;
}

double ap(const Permutation& sigma, const RelevanceVector& r) {
    require_same_size(sigma, r);
    require_binary(r, "ap");
    const int relevant = r.l1();
    if (relevant == 0) return 1.0;
    double total = 0.0;
    int hits = 0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[sigma.item_at(j)] == 1) {
            ++hits;
            total += static_cast<double>(hits) / static_cast<double>(j + 1);
        }
    }
    return total / relevant;
}

double auc(const Permutation& sigma, const RelevanceVector& r) {
    require_same_size(sigma, r);
    require_binary(r, "auc");
    const double ones = r.l1();
    const double zeros = static_cast<double>(r.size()) - ones;
    if (ones == 0.0 || zeros == 0.0) return 0.0;
    return pairwise_loss(sigma, r) / (ones * zeros);
}

double evaluate(const MeasureId& id, const Permutation& sigma, const RelevanceVector& r) {
    switch (id.kind) {
        case MeasureKind::SumLoss: return sum_loss(sigma, r);
        case MeasureKind::PairwiseLoss: return pairwise_loss(sigma, r);
        case MeasureKind::DCG: return dcg(sigma, r);
        case MeasureKind::NDCG: return ndcg(sigma, r);
        case MeasureKind::PrecisionAtN: return precision_at_n(sigma, r, id.cutoff);
        case MeasureKind::AP: return ap(sigma, r);
        case MeasureKind::AUC: return auc(sigma, r);
        case MeasureKind::NDCGAtN: return ndcg_at_n(sigma, r, id.cutoff);
    }
    throw InputError("evaluate: unknown measure");
}

}  // namespace rtopk
