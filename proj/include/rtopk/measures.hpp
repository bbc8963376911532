#pragma once

#include <string>
#include <vector>

#include "rtopk/core.hpp"

namespace rtopk {

enum class MeasureKind { SumLoss, PairwiseLoss, DCG, NDCG, PrecisionAtN, AP, AUC, NDCGAtN };

struct MeasureId {
    MeasureKind kind = MeasureKind::SumLoss;
    std::size_t cutoff = 0;  // only PrecisionAtN and NDCGAtN use it

    static MeasureId sum_loss() { return {MeasureKind::SumLoss, 0}; }
    static MeasureId pairwise_loss() { return {MeasureKind::PairwiseLoss, 0}; }
    static MeasureId dcg() { return {MeasureKind::DCG, 0}; }
    static MeasureId ndcg() { return {MeasureKind::NDCG, 0}; }
    static MeasureId precision_at(std::size_t n) { return {MeasureKind::PrecisionAtN, n}; }
    static MeasureId ap() { return {MeasureKind::AP, 0}; }
    static MeasureId auc() { return {MeasureKind::AUC, 0}; }
    static MeasureId ndcg_at(std::size_t n) { return {MeasureKind::NDCGAtN, n}; }

    // Gains are maximized; SumLoss, PairwiseLoss and AUC are minimized.
    bool is_gain() const noexcept;
    bool binary_only() const noexcept;
    std::string name() const;
    // Accepts "sumloss", "pl", "dcg", "ndcg", "ap", "auc", "precision@3", "ndcg@10".
    static MeasureId parse(const std::string& text);
};

double sum_loss(const Permutation& sigma, const RelevanceVector& r);
double pairwise_loss(const Permutation& sigma, const RelevanceVector& r);
double dcg(const Permutation& sigma, const RelevanceVector& r);
double ndcg(const Permutation& sigma, const RelevanceVector& r);
double ndcg_at_n(const Permutation& sigma, const RelevanceVector& r, std::size_t n);
double precision_at_n(const Permutation& sigma, const RelevanceVector& r, std::size_t n);
double ap(const Permutation& sigma, const RelevanceVector& r);
double auc(const Permutation& sigma, const RelevanceVector& r);

// Dispatches on id; returns the raw measure (gains stay positive).
double evaluate(const MeasureId& id, const Permutation& sigma, const RelevanceVector& r);

// Loss orientation: gains are negated so smaller is always better.
inline double evaluate_as_loss(const MeasureId& id, const Permutation& sigma,
                               const RelevanceVector& r) {
    const double v = evaluate(id, sigma, r);
    return id.is_gain() ? -v : v;
}

// 2^g - 1.
double dcg_gain(int grade);
// Ideal DCG of r (top-n if n > 0).
double ideal_dcg(const RelevanceVector& r, std::size_t n = 0);

}  // namespace rtopk
