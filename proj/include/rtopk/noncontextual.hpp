#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "rtopk/measures.hpp"

namespace rtopk {

enum class GradeTransform { Identity, Exponential };  // Exponential: v -> 2^v - 1

double apply_transform(GradeTransform t, int grade);
// Exponential for DCG, identity otherwise.
GradeTransform transform_for(const MeasureId& id);

struct BlockConfig {
    std::size_t T = 0;
    std::size_t K = 1;
    std::size_t k = 1;
    std::size_t m = 0;
    double epsilon = 1.0;
    MeasureId measure = MeasureId::sum_loss();
    GradeTransform transform = GradeTransform::Identity;
    int max_grade = 1;

    std::size_t num_cells() const noexcept { return (m + k - 1) / k; }
    std::size_t block_size() const noexcept { return K == 0 ? 0 : T / K; }
    // Rounds after the last full block; they run exploitation-only.
    std::size_t tail_rounds() const noexcept { return T - K * block_size(); }
    void validate() const;
};

// Measures the blocked learner supports: SumLoss, PairwiseLoss, DCG, Precision@n.
bool noncontextual_supports(const MeasureId& id);

// Perturbation scale with unit constant: 1/sqrt(mK), divided by (2^n-1)^2 for DCG.
double default_epsilon(const MeasureId& id, std::size_t m, std::size_t K, int max_grade);

// K = clamp(round(m^(1/3) T^(2/3) / ceil(m/k)^(2/3)), 1, T / ceil(m/k)).
BlockConfig plan_blocks(std::size_t T, std::size_t m, std::size_t k, const MeasureId& measure,
                        int max_grade = 1);

// Consecutive items grouped k at a time; the last cell may be short.
std::vector<std::vector<std::size_t>> make_cells(std::size_t m, std::size_t k);

// Cell items on top in cell order, then the remaining items by ascending id.
Permutation exploration_perm(std::size_t cell_index, const std::vector<std::vector<std::size_t>>& cells);

// Builds the block relevance estimate from one exploration feedback per cell.
std::vector<double> assemble_estimate(const std::vector<std::optional<TopKFeedback>>& per_cell,
                                      const std::vector<std::vector<std::size_t>>& cells,
                                      GradeTransform transform);

// Perturbed scores s_hat + p with p uniform on [0, 1/epsilon]^m.
std::vector<double> ftpl_perturb(const std::vector<double>& s_hat, double epsilon, Rng& rng);
// argsort_desc of the perturbed scores.
Permutation ftpl_step(const std::vector<double>& s_hat, double epsilon, Rng& rng);

// Loss of sigma summed over rounds, from cumulative statistics. Every
// supported measure is linear in a per-item transform of R up to an
// R-dependent offset, which makes hindsight optimization a sort.
class CumulativeLoss {
public:
    CumulativeLoss(const MeasureId& id, std::size_t m);
    void add(const RelevanceVector& r);
    double of(const Permutation& sigma) const;
    // Minimum over all permutations: exhaustive for m <= 6, sorting otherwise.
    double best() const;
    double best_by_sorting() const;
    double best_exhaustive() const;

private:
    double rank_weight(std::size_t rank) const;
    MeasureId id_;
    std::size_t m_;
    std::vector<double> totals_;
    double offset_ = 0.0;
};

// Algorithm state machine: call act() then observe() once per round.
class BlockedFtpl {
public:
    enum class Phase { Explore, Exploit };
    struct Action {
        Permutation perm;
        Phase phase = Phase::Exploit;
        std::size_t cell = 0;
    };

    BlockedFtpl(BlockConfig cfg, std::uint64_t seed);

    Action act();
    void observe(const TopKFeedback& fb);

    const BlockConfig& config() const noexcept { return cfg_; }
    const std::vector<double>& s_hat() const noexcept { return s_hat_; }
    std::size_t round() const noexcept { return t_; }
    std::size_t block() const noexcept;

private:
    void start_block();
    void close_block();

    BlockConfig cfg_;
    Rng rng_;
    std::vector<std::vector<std::size_t>> cells_;
    std::vector<double> s_hat_;
    std::vector<std::optional<std::size_t>> slot_cell_;  // offset within block -> cell
    std::vector<std::optional<TopKFeedback>> pending_;
    std::optional<Action> last_;
    std::size_t t_ = 0;
};

struct RoundRecord {
    std::size_t round = 0;  // 1-based
    bool explore = false;
    double loss = 0.0;  // gains negated
    double cum_loss = 0.0;
    double best_cum_loss = 0.0;
    double avg_regret = 0.0;
};

struct NoncontextualLog {
    std::vector<RoundRecord> rounds;
    void write_csv(std::ostream& out) const;
};

NoncontextualLog run_noncontextual(const BlockConfig& cfg, const std::vector<RelevanceVector>& stream,
                                   Rng& rng);

// Full-information FTPL baseline: the whole R_t is observed every round.
// epsilon <= 0 selects 1/sqrt(mT).
NoncontextualLog run_full_information_ftpl(const MeasureId& id, std::size_t T, double epsilon,
                                           const std::vector<RelevanceVector>& stream, Rng& rng);

}  // namespace rtopk
