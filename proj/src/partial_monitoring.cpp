#include "rtopk/partial_monitoring.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace rtopk {

std::size_t GameMatrices::action_index(const Permutation& p) const {
    for (std::size_t i = 0; i < learner_actions.size(); ++i)
        if (learner_actions[i] == p) return i;
    throw InputError("action_index: permutation is not a learner action");
}

GameMatrices build_game(const MeasureId& measure, std::size_t m, int n) {
    if (m == 0) throw InputError("build_game: m must be >= 1");
    if (m > 6) throw CapacityError("build_game: m > 6");
    if (std::pow(n + 1.0, static_cast<double>(m)) > 4096.0)
        throw CapacityError("build_game: (n+1)^m > 4096");
    if (measure.binary_only() && n != 1)
        throw DomainError("build_game: " + measure.name() + " needs binary relevance");

    GameMatrices g;
    g.m = m;
    g.n = n;
    g.measure = measure;
    g.gain_oriented = measure.is_gain();
    for (const auto& p : enumerate_permutations(m)) g.learner_actions.push_back(p.inverse());
    g.adversary_actions = enumerate_relevance(m, n);

    const auto rows = static_cast<Eigen::Index>(g.learner_actions.size());
    const auto cols = static_cast<Eigen::Index>(g.adversary_actions.size());
    g.loss.resize(rows, cols);
    g.feedback.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& sigma = g.learner_actions[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < cols; ++j) {
            const auto& r = g.adversary_actions[static_cast<std::size_t>(j)];
            g.loss(i, j) = evaluate_as_loss(measure, sigma, r);
            g.feedback(i, j) = r[sigma.item_at(0)];
        }
    }
    return g;
}

std::vector<Eigen::MatrixXd> signal_matrices(const GameMatrices& g) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(g.num_actions());
    for (Eigen::Index i = 0; i < g.feedback.rows(); ++i) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(g.n + 1, g.feedback.cols());
        for (Eigen::Index l = 0; l < g.feedback.cols(); ++l) s(g.feedback(i, l), l) = 1.0;
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

// Orthonormal basis of the column space, via rank-revealing SVD.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& a) {
    if (a.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double tol = std::max(a.rows(), a.cols()) * sv(0) * 1e-12;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol) ++rank;
    return svd.matrixU().leftCols(rank);
}

// Columns are the transposed signal rows (Col(S_k^T)) of the chosen actions.
Eigen::MatrixXd stacked_signal_columns(const std::vector<Eigen::MatrixXd>& sig,
                                       const std::vector<std::size_t>& actions) {
    if (actions.empty()) return {};
    const Eigen::Index outcomes = sig[0].cols();
    const Eigen::Index per = sig[0].rows();
    Eigen::MatrixXd b(outcomes, per * static_cast<Eigen::Index>(actions.size()));
    for (std::size_t a = 0; a < actions.size(); ++a)
        b.middleCols(per * static_cast<Eigen::Index>(a), per) = sig[actions[a]].transpose();
    return b;
}

double relative(double residual, double scale) { return scale > 0.0 ? residual / scale : 0.0; }

}  // namespace

double span_residual(const Eigen::MatrixXd& basis, const Eigen::VectorXd& v) {
    const Eigen::MatrixXd q = orthonormal_basis(basis);
    const Eigen::VectorXd r = v - q * (q.transpose() * v);
    return relative(r.norm(), v.norm());
}

SpanResult global_observability(const GameMatrices& g) {
    const auto sig = signal_matrices(g);
    std::vector<std::size_t> all(g.num_actions());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Eigen::MatrixXd q = orthonormal_basis(stacked_signal_columns(sig, all));

    // Projection residual is linear, so pair residuals are differences of
    // per-action residuals.
    const Eigen::MatrixXd lt = g.loss.transpose();
    const Eigen::MatrixXd res = lt - q * (q.transpose() * lt);

    SpanResult out;
    out.holds = true;
    for (Eigen::Index i = 0; i < lt.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < lt.cols(); ++j) {
            const double scale = (lt.col(i) - lt.col(j)).norm();
            const double r = relative((res.col(i) - res.col(j)).norm(), scale);
            if (r > out.max_residual) {
                out.max_residual = r;
                out.worst_pair = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
            }
        }
    }
    out.holds = out.max_residual < kSpanInTol;
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> neighbor_pairs(const GameMatrices& g) {
    const auto k = g.measure.kind;
    if (k != MeasureKind::SumLoss && k != MeasureKind::PairwiseLoss && k != MeasureKind::DCG)
        throw ContractError("neighbor_pairs: " + g.measure.name() +
                            " lacks a strictly monotone rank weighting");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < g.num_actions(); ++i) {
        const auto& a = g.learner_actions[i].rank_to_item();
        for (std::size_t j = i + 1; j < g.num_actions(); ++j) {
            const auto& b = g.learner_actions[j].rank_to_item();
            std::vector<std::size_t> diff;
            for (std::size_t r = 0; r < a.size(); ++r)
                if (a[r] != b[r]) diff.push_back(r);
            if (diff.size() == 2 && diff[1] == diff[0] + 1) out.emplace_back(i, j);
        }
    }
    return out;
}

SpanResult local_observability(const GameMatrices& g, std::pair<std::size_t, std::size_t> pair,
                               std::vector<std::size_t> neighborhood) {
    if (pair.first >= g.num_actions() || pair.second >= g.num_actions())
        throw InputError("local_observability: action index out of range");
    if (neighborhood.empty()) neighborhood = {pair.first, pair.second};
    for (auto a : neighborhood)
        if (a >= g.num_actions()) throw InputError("local_observability: neighborhood index out of range");
    const auto sig = signal_matrices(g);
    const Eigen::VectorXd d = g.loss_vector(pair.first) - g.loss_vector(pair.second);
    SpanResult out;
    out.max_residual = span_residual(stacked_signal_columns(sig, neighborhood), d);
    out.holds = out.max_residual < kSpanInTol;
    out.worst_pair = pair;
    return out;
}

void dump_game_csv(const GameMatrices& g, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, auto value_at) {
        std::ofstream f(std::filesystem::path(dir) / name);
        if (!f) throw InputError("dump_game_csv: cannot write " + name);
        f.precision(17);
        f << "action";
        for (const auto& r : g.adversary_actions) f << ',' << r.to_string();
        f << '\n';
        for (std::size_t i = 0; i < g.num_actions(); ++i) {
            f << g.learner_actions[i].item_rank_label();
            for (std::size_t j = 0; j < g.num_outcomes(); ++j) f << ',' << value_at(i, j);
            f << '\n';
        }
    };
    const double sign = g.gain_oriented ? -1.0 : 1.0;
    write("loss.csv", [&](std::size_t i, std::size_t j) {
        return sign * g.loss(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    });
    write("feedback.csv", [&](std::size_t i, std::size_t j) {
        return g.feedback(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    });
}

}  // namespace rtopk
