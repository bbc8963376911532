#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rtopk/measures.hpp"

namespace rtopk {

// Finite game for top-1 feedback. Rows are learner actions, columns are
// adversary actions. Gain measures are stored negated (gain_oriented = true)
// so one code path handles both orientations.
struct GameMatrices {
    std::size_t m = 0;
    int n = 1;
    MeasureId measure;
    bool gain_oriented = false;
    Eigen::MatrixXd loss;
    Eigen::MatrixXi feedback;
    std::vector<Permutation> learner_actions;
    std::vector<RelevanceVector> adversary_actions;

    std::size_t num_actions() const noexcept { return learner_actions.size(); }
    std::size_t num_outcomes() const noexcept { return adversary_actions.size(); }
    // Loss row of action i as a column vector.
    Eigen::VectorXd loss_vector(std::size_t i) const { return loss.row(static_cast<Eigen::Index>(i)).transpose(); }
    // Index of a learner action, or throws.
    std::size_t action_index(const Permutation& p) const;
};

// Learner actions are ordered lexicographically on the item->rank array, so
// with m=3 action 0 is "123" and action 4 is "312" in the tables' labeling.
GameMatrices build_game(const MeasureId& measure, std::size_t m, int n);

// (n+1) x outcomes 0/1 matrix per action; entry (g, l) = 1 iff feedback = g.
std::vector<Eigen::MatrixXd> signal_matrices(const GameMatrices& g);

struct SpanResult {
    bool holds = false;
    double max_residual = 0.0;
    std::pair<std::size_t, std::size_t> worst_pair{0, 0};
};

inline constexpr double kSpanInTol = 1e-9;
inline constexpr double kSpanOutTol = 1e-3;

// Relative least-squares residual of v against the column span of basis.
double span_residual(const Eigen::MatrixXd& basis, const Eigen::VectorXd& v);

// Tests every action pair's loss difference against the span of all
// signal-matrix rows.
SpanResult global_observability(const GameMatrices& g);

// Pairs of actions whose rankings differ by one adjacent transposition.
// Only SumLoss (and PairwiseLoss, which shares its regret) and DCG qualify.
std::vector<std::pair<std::size_t, std::size_t>> neighbor_pairs(const GameMatrices& g);

// Span test of l_i - l_j against the signal rows of the given neighborhood.
// An empty neighborhood defaults to {i, j}.
SpanResult local_observability(const GameMatrices& g, std::pair<std::size_t, std::size_t> pair,
                               std::vector<std::size_t> neighborhood = {});

// Writes loss.csv and feedback.csv into dir, rows labeled by item->rank
// strings and columns by relevance strings.
void dump_game_csv(const GameMatrices& g, const std::string& dir);

}  // namespace rtopk
