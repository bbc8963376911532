#pragma once

#include <string>

#include <Eigen/Dense>

#include "rtopk/core.hpp"

namespace rtopk {

// One query's documents, m rows by d features.
using FeatureMatrix = Eigen::MatrixXd;

enum class SurrogateKind { Squared, RankSVM, KL, SmoothDCG, ListNetCE };

struct SurrogateId {
    SurrogateKind kind = SurrogateKind::Squared;
    double smoothing = 0.01;  // SmoothDCG temperature

    static SurrogateId squared() { return {SurrogateKind::Squared}; }
    static SurrogateId ranksvm() { return {SurrogateKind::RankSVM}; }
    static SurrogateId kl() { return {SurrogateKind::KL}; }
    static SurrogateId smooth_dcg(double eps = 0.01) { return {SurrogateKind::SmoothDCG, eps}; }
    static SurrogateId listnet() { return {SurrogateKind::ListNetCE}; }

    // Feedback depth the estimator needs; ListNetCE needs the full list.
    std::size_t required_k(std::size_t m) const noexcept;
    bool convex() const noexcept { return kind != SurrogateKind::SmoothDCG; }
    // SmoothDCG is a smoothed gain and is maximized; the rest are losses.
    bool is_gain() const noexcept { return kind == SurrogateKind::SmoothDCG; }
    std::string name() const;
    static SurrogateId parse(const std::string& text);
};

double value(const SurrogateId& id, const Eigen::VectorXd& s, const RelevanceVector& r);
Eigen::VectorXd gradient(const SurrogateId& id, const Eigen::VectorXd& s, const RelevanceVector& r);

// Exploration mixture of one contextual round: the deterministic ranking
// (top1, top2) is played with probability 1-gamma, a uniform ranking otherwise.
struct Propensities {
    double gamma = 0.1;
    std::size_t m = 2;
    std::size_t top1 = 0;
    std::size_t top2 = 1;

    // Validates 0 < gamma < 1/2 and distinct in-range tops.
    static Propensities make(double gamma, std::size_t m, std::size_t top1, std::size_t top2);
    // Heuristic variant: gamma scaled by factor, capped at 1, used only as an
    // estimator denominator on mismatch rounds.
    Propensities boosted(double factor) const;
};

// Probability that `item` is ranked first.
double propensity_top1(const Propensities& pr, std::size_t item);
// Probability that (a, b) occupy ranks 1 and 2 in that order.
double propensity_top2(const Propensities& pr, std::size_t a, std::size_t b);

// Unbiased estimate of the score-space gradient at s from top-k feedback.
// s is the deterministic score, not the explored one. Full feedback (k = m)
// returns the exact gradient.
Eigen::VectorXd estimate_score_gradient(const SurrogateId& id, const Eigen::VectorXd& s,
                                        const TopKFeedback& feedback, const Propensities& pr);
// X^T times the score-space estimate.
Eigen::VectorXd estimate_gradient(const SurrogateId& id, const Eigen::VectorXd& s, const TopKFeedback& feedback,
                                  const Propensities& pr, const FeatureMatrix& x);

// max_j ||X_j:||_2, the 1->2 norm of X^T.
double operator_norm_1_to_2(const FeatureMatrix& x);

// Constant C such that E||z||^2 <= C / gamma, following the explicit bounding
// chains for each estimator. r_d bounds row norms, u the weight norm.
double second_moment_constant(const SurrogateId& id, std::size_t m, double r_d, double u, double r_max);

struct DecomposabilityReport {
    // e_1 coefficient of the RankSVM gradient at s=(1,0,0) for R = 000, 100, 011, 111.
    double svm_coeff[4] = {0, 0, 0, 0};
    double svm_delta_first = 0.0;   // coeff(000) - coeff(100)
    double svm_delta_second = 0.0;  // coeff(011) - coeff(111)
    // Mixed partial d^2/dR1 dR2 of the e_1 coefficient of the gradient, by
    // central finite differences at R=(0.3,0.5,0.1).
    double listnet_mixed_partial = 0.0;
    double squared_mixed_partial = 0.0;
};

DecomposabilityReport decomposability_counterexamples();

}  // namespace rtopk
