#include "rtopk/noncontextual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rtopk/csv.hpp"

namespace rtopk {

double apply_transform(GradeTransform t, int grade) {
    return t == GradeTransform::Exponential ? dcg_gain(grade) : static_cast<double>(grade);
}

GradeTransform transform_for(const MeasureId& id) {
    return id.kind == MeasureKind::DCG ? GradeTransform::Exponential : GradeTransform::Identity;
}

bool noncontextual_supports(const MeasureId& id) {
    switch (id.kind) {
        case MeasureKind::SumLoss:
        case MeasureKind::PairwiseLoss:
        case MeasureKind::DCG:
        case MeasureKind::PrecisionAtN:
            return true;
        default:
            return false;
    }
}

void BlockConfig::validate() const {
    if (m == 0) throw ConfigError("block config: m must be >= 1");
    if (k == 0 || k > m) throw ConfigError("block config: k must be in 1..m");
    if (T == 0) throw ConfigError("block config: T must be >= 1");
    if (K == 0 || K > T) throw ConfigError("block config: K must be in 1..T");
    if (num_cells() > block_size())
        throw ConfigError("block config: block of " + std::to_string(block_size()) +
                          " rounds cannot hold " + std::to_string(num_cells()) + " exploration rounds");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("block config: epsilon must be > 0");
    if (!noncontextual_supports(measure))
        throw ConfigError("block config: measure " + measure.name() + " is not supported");
    if (measure.kind == MeasureKind::PrecisionAtN && (measure.cutoff == 0 || measure.cutoff > m))
        throw ConfigError("block config: precision cutoff must be in 1..m");
    if (max_grade < 1) throw ConfigError("block config: max_grade must be >= 1");
}

double default_epsilon(const MeasureId& id, std::size_t m, std::size_t K, int max_grade) {
    const double base = 1.0 / std::sqrt(static_cast<double>(m) * static_cast<double>(K));
    if (id.kind == MeasureKind::DCG) {
        const double g = dcg_gain(max_grade);
        return base / (g * g);
    }
    return base;
}

BlockConfig plan_blocks(std::size_t T, std::size_t m, std::size_t k, const MeasureId& measure,
                        int max_grade) {
    if (m == 0 || k == 0 || k > m) throw ConfigError("plan_blocks: need 1 <= k <= m");
    if (T < m) throw ConfigError("plan_blocks: T must be >= m");
    const std::size_t cells = (m + k - 1) / k;
    if (T < m * cells) throw ConfigError("plan_blocks: T < m*ceil(m/k) is infeasible");

    const double raw = std::cbrt(static_cast<double>(m)) * std::pow(static_cast<double>(T), 2.0 / 3.0) /
                       std::pow(static_cast<double>(cells), 2.0 / 3.0);
    const auto rounded = static_cast<std::size_t>(std::llround(raw));
    BlockConfig cfg;
    cfg.T = T;
    cfg.m = m;
    cfg.k = k;
    cfg.K = std::clamp<std::size_t>(rounded, 1, T / cells);
    cfg.measure = measure;
    cfg.max_grade = max_grade;
    cfg.transform = transform_for(measure);
    cfg.epsilon = default_epsilon(measure, m, cfg.K, max_grade);
    cfg.validate();
    return cfg;
}

std::vector<std::vector<std::size_t>> make_cells(std::size_t m, std::size_t k) {
    if (k == 0) throw ConfigError("make_cells: k must be >= 1");
    std::vector<std::vector<std::size_t>> cells;
    for (std::size_t start = 0; start < m; start += k) {
        std::vector<std::size_t> cell;
        for (std::size_t i = start; i < std::min(m, start + k); ++i) cell.push_back(i);
        cells.push_back(std::move(cell));
    }
    return cells;
}

Permutation exploration_perm(std::size_t cell_index, const std::vector<std::vector<std::size_t>>& cells) {
    if (cell_index >= cells.size()) throw InputError("exploration_perm: cell index out of range");
    std::size_t m = 0;
    for (const auto& c : cells) m += c.size();
    std::vector<bool> on_top(m, false);
    std::vector<std::size_t> order;
    order.reserve(m);
    for (std::size_t item : cells[cell_index]) {
        order.push_back(item);
        on_top.at(item) = true;
    }
    for (std::size_t item = 0; item < m; ++item)
        if (!on_top[item]) order.push_back(item);
    return Permutation(std::move(order));
}

std::vector<double> assemble_estimate(const std::vector<std::optional<TopKFeedback>>& per_cell,
                                      const std::vector<std::vector<std::size_t>>& cells,
                                      GradeTransform transform) {
    if (per_cell.size() != cells.size()) throw StateError("assemble_estimate: one feedback per cell required");
    std::size_t m = 0;
    for (const auto& c : cells) m += c.size();
    std::vector<double> est(m, 0.0);
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (!per_cell[j]) throw StateError("assemble_estimate: missing feedback for cell " + std::to_string(j));
        const TopKFeedback& fb = *per_cell[j];
        for (std::size_t item : cells[j]) {
            const std::size_t rank = fb.perm.rank_of(item);
            if (rank >= fb.k) throw StateError("assemble_estimate: cell item not revealed");
            est[item] = apply_transform(transform, fb.revealed[rank]);
        }
    }
    return est;
}

std::vector<double> ftpl_perturb(const std::vector<double>& s_hat, double epsilon, Rng& rng) {
    if (!(epsilon > 0.0)) throw InputError("ftpl: epsilon must be > 0");
    std::vector<double> y(s_hat);
    const double scale = 1.0 / epsilon;
    for (double& v : y) v += scale * rng.uniform();
    return y;
}

Permutation ftpl_step(const std::vector<double>& s_hat, double epsilon, Rng& rng) {
    const auto y = ftpl_perturb(s_hat, epsilon, rng);
    return argsort_desc(y, rng);
}

CumulativeLoss::CumulativeLoss(const MeasureId& id, std::size_t m) : id_(id), m_(m), totals_(m, 0.0) {
    if (!noncontextual_supports(id)) throw ConfigError("CumulativeLoss: unsupported measure " + id.name());
}

double CumulativeLoss::rank_weight(std::size_t rank) const {
    switch (id_.kind) {
        case MeasureKind::SumLoss:
        case MeasureKind::PairwiseLoss:
            return static_cast<double>(rank + 1);
        case MeasureKind::DCG:
            return -1.0 / std::log2(static_cast<double>(rank) + 2.0);
        case MeasureKind::PrecisionAtN:
            return rank < id_.cutoff ? -1.0 : 0.0;
        default:
            return 0.0;
    }
}

void CumulativeLoss::add(const RelevanceVector& r) {
    if (r.size() != m_) throw InputError("CumulativeLoss: size mismatch");
    const GradeTransform tr = transform_for(id_);
    for (std::size_t i = 0; i < m_; ++i) totals_[i] += apply_transform(tr, r[i]);
    if (id_.kind == MeasureKind::PairwiseLoss) {
        // PL and SumLoss differ by a quantity that depends on R only.
        const auto id = Permutation::identity(m_);
        offset_ += pairwise_loss(id, r) - sum_loss(id, r);
    }
}

double CumulativeLoss::of(const Permutation& sigma) const {
    double total = offset_;
    for (std::size_t i = 0; i < m_; ++i) total += rank_weight(sigma.rank_of(i)) * totals_[i];
    return total;
}

double CumulativeLoss::best_by_sorting() const {
    std::vector<std::size_t> idx(m_);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return totals_[a] > totals_[b]; });
    return of(Permutation(std::move(idx)));
}

double CumulativeLoss::best_exhaustive() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : enumerate_permutations(m_)) best = std::min(best, of(p));
    return best;
}

double CumulativeLoss::best() const { return m_ <= 6 ? best_exhaustive() : best_by_sorting(); }

BlockedFtpl::BlockedFtpl(BlockConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), rng_(seed), cells_(make_cells(cfg_.m, cfg_.k)), s_hat_(cfg_.m, 0.0) {
    cfg_.validate();
}

std::size_t BlockedFtpl::block() const noexcept { return t_ / cfg_.block_size(); }

void BlockedFtpl::start_block() {
    const std::size_t b = cfg_.block_size();
    const std::size_t c = cells_.size();
    slot_cell_.assign(b, std::nullopt);
    pending_.assign(c, std::nullopt);
    // Partial Fisher-Yates: the j-th drawn offset hosts cell j.
    std::vector<std::size_t> offsets(b);
    std::iota(offsets.begin(), offsets.end(), std::size_t{0});
    for (std::size_t j = 0; j < c; ++j) {
        const std::size_t pick = j + rng_.below(b - j);
        std::swap(offsets[j], offsets[pick]);
        slot_cell_[offsets[j]] = j;
    }
}

void BlockedFtpl::close_block() {
    const auto est = assemble_estimate(pending_, cells_, cfg_.transform);
    for (std::size_t i = 0; i < s_hat_.size(); ++i) s_hat_[i] += est[i];
}

BlockedFtpl::Action BlockedFtpl::act() {
    if (last_) throw StateError("BlockedFtpl: act() called twice without observe()");
    if (t_ >= cfg_.T) throw StateError("BlockedFtpl: horizon exhausted");
    const std::size_t b = cfg_.block_size();
    const bool in_block = t_ < cfg_.K * b;
    if (in_block && t_ % b == 0) start_block();

    Action a;
    const std::optional<std::size_t> cell = in_block ? slot_cell_[t_ % b] : std::nullopt;
    if (cell) {
        a.perm = exploration_perm(*cell, cells_);
        a.phase = Phase::Explore;
        a.cell = *cell;
    } else {
        a.perm = ftpl_step(s_hat_, cfg_.epsilon, rng_);
        a.phase = Phase::Exploit;
    }
    last_ = a;
    return a;
}

void BlockedFtpl::observe(const TopKFeedback& fb) {
    if (!last_) throw StateError("BlockedFtpl: observe() without act()");
    if (!(fb.perm == last_->perm)) throw ContractError("BlockedFtpl: feedback is for a different ranking");
    if (fb.k < cfg_.k) throw ContractError("BlockedFtpl: feedback shallower than k");
    if (last_->phase == Phase::Explore) pending_[last_->cell] = fb;
    last_.reset();
    ++t_;
    const std::size_t b = cfg_.block_size();
    if (t_ <= cfg_.K * b && t_ % b == 0) close_block();
}

void NoncontextualLog::write_csv(std::ostream& out) const {
    out << "round,phase,loss,cum_loss,best_cum_loss,avg_regret\n";
    for (const auto& r : rounds)
        out << r.round << ',' << (r.explore ? "explore" : "exploit") << ',' << fmt_num(r.loss) << ','
            << fmt_num(r.cum_loss) << ',' << fmt_num(r.best_cum_loss) << ',' << fmt_num(r.avg_regret) << '\n';
}

namespace {

void record(NoncontextualLog& log, std::size_t t, bool explore, double loss, const CumulativeLoss& cum) {
    RoundRecord rec;
    rec.round = t + 1;
    rec.explore = explore;
    rec.loss = loss;
    rec.cum_loss = (log.rounds.empty() ? 0.0 : log.rounds.back().cum_loss) + loss;
    rec.best_cum_loss = cum.best();
    rec.avg_regret = (rec.cum_loss - rec.best_cum_loss) / static_cast<double>(rec.round);
    log.rounds.push_back(rec);
}

void check_stream(const std::vector<RelevanceVector>& stream, std::size_t T, std::size_t m) {
    if (stream.size() < T) throw InputError("stream shorter than horizon");
    for (std::size_t t = 0; t < T; ++t)
        if (stream[t].size() != m) throw InputError("stream vector " + std::to_string(t) + " has wrong length");
}

}  // namespace

NoncontextualLog run_noncontextual(const BlockConfig& cfg, const std::vector<RelevanceVector>& stream, Rng& rng) {
    cfg.validate();
    check_stream(stream, cfg.T, cfg.m);
    BlockedFtpl learner(cfg, rng.next_u64());
    CumulativeLoss cum(cfg.measure, cfg.m);
    NoncontextualLog log;
    log.rounds.reserve(cfg.T);
    for (std::size_t t = 0; t < cfg.T; ++t) {
        const auto a = learner.act();
        const RelevanceVector& r = stream[t];
        const double loss = evaluate_as_loss(cfg.measure, a.perm, r);
        learner.observe(observe_top_k(a.perm, r, cfg.k));
        cum.add(r);
        record(log, t, a.phase == BlockedFtpl::Phase::Explore, loss, cum);
    }
    return log;
}

NoncontextualLog run_full_information_ftpl(const MeasureId& id, std::size_t T, double epsilon,
                                           const std::vector<RelevanceVector>& stream, Rng& rng) {
    if (!noncontextual_supports(id)) throw ConfigError("full-information FTPL: unsupported measure " + id.name());
    if (stream.empty()) throw InputError("full-information FTPL: empty stream");
    const std::size_t m = stream.front().size();
    check_stream(stream, T, m);
    if (epsilon <= 0.0) epsilon = 1.0 / std::sqrt(static_cast<double>(m) * static_cast<double>(T));
    const GradeTransform tr = transform_for(id);
    Rng own(rng.next_u64());
    std::vector<double> s_hat(m, 0.0);
    CumulativeLoss cum(id, m);
    NoncontextualLog log;
    log.rounds.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        const Permutation sigma = ftpl_step(s_hat, epsilon, own);
        const RelevanceVector& r = stream[t];
        const double loss = evaluate_as_loss(id, sigma, r);
        for (std::size_t i = 0; i < m; ++i) s_hat[i] += apply_transform(tr, r[i]);
        cum.add(r);
        record(log, t, false, loss, cum);
    }
    return log;
}

}  // namespace rtopk
