#include "rtopk/contextual.hpp"

#include <cmath>
#include <limits>

#include "rtopk/csv.hpp"
#include "rtopk/measures.hpp"

namespace rtopk {

double ContextualConfig::gamma_at(std::size_t t) const {
    return std::min(gamma_cap, c_gamma / std::cbrt(static_cast<double>(t)));
}

double ContextualConfig::eta_at(std::size_t t) const {
    return c_eta / std::pow(static_cast<double>(t), 2.0 / 3.0);
}

void ContextualConfig::validate() const {
    if (!(c_gamma >= 0.0 && c_gamma < 0.5)) throw ConfigError("contextual: c_gamma must lie in [0, 1/2)");
    if (!(gamma_cap > 0.0 && gamma_cap < 0.5)) throw ConfigError("contextual: gamma cap must lie in (0, 1/2)");
    if (!(c_eta > 0.0)) throw ConfigError("contextual: c_eta must be > 0");
    if (!(U > 0.0)) throw ConfigError("contextual: U must be > 0");
    if (!(mismatch_boost >= 1.0)) throw ConfigError("contextual: mismatch boost must be >= 1");
    if (m < 2) throw ConfigError("contextual: m must be >= 2");
    if (d == 0) throw ConfigError("contextual: d must be >= 1");
    if (surrogate.kind == SurrogateKind::ListNetCE)
        throw ConfigError("contextual: ListNet needs full information; use the baseline");
    const std::size_t kk = feedback_depth();
    if (kk < surrogate.required_k(m) || kk > m)
        throw ConfigError("contextual: feedback depth must be in " + std::to_string(surrogate.required_k(m)) + ".." +
                          std::to_string(m));
}

namespace {

void check_shape(const FeatureMatrix& x, const ContextualConfig& cfg) {
    if (static_cast<std::size_t>(x.rows()) != cfg.m || static_cast<std::size_t>(x.cols()) != cfg.d)
        throw InputError("contextual: feature matrix must be m x d");
}

Eigen::VectorXd uniform_scores(std::size_t m, Rng& rng) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = rng.uniform();
    return s;
}

std::span<const double> view(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

double ndcg10(const Permutation& sigma, const RelevanceVector& r) { return ndcg_at_n(sigma, r, 10); }

void push(ContextualLog& log, bool explored, bool boosted, double loss, double nd) {
    ContextualRecord rec;
    rec.round = log.rounds.size() + 1;
    rec.explored = explored;
    rec.boosted = boosted;
    rec.surrogate_loss = loss;
    rec.ndcg10 = nd;
    const double prev = log.rounds.empty() ? 0.0 : log.rounds.back().avg_ndcg10;
    rec.avg_ndcg10 = prev + (nd - prev) / static_cast<double>(rec.round);
    log.rounds.push_back(rec);
}

void check_order(const std::vector<QueryRecord>& queries, const std::vector<std::size_t>& order) {
    for (std::size_t q : order)
        if (q >= queries.size()) throw InputError("contextual: query index out of range");
}

}  // namespace

Eigen::VectorXd project_to_ball(const Eigen::VectorXd& w, double U) {
    const double n = w.norm();
    return n > U ? Eigen::VectorXd(w * (U / n)) : w;
}

ActResult act(const RankerState& state, const FeatureMatrix& x, const ContextualConfig& cfg, Rng& rng) {
    check_shape(x, cfg);
    if (state.w.size() != x.cols()) throw InputError("contextual: weight dimension mismatch");
    ActResult out;
    out.gamma = cfg.gamma_at(state.t);
    out.s = x * state.w;
    out.sigma = argsort_desc(view(out.s), rng);
    out.explored = out.gamma > 0.0 && rng.bernoulli(out.gamma);
    if (out.explored) {
        out.s_tilde = uniform_scores(cfg.m, rng);
        out.sigma_tilde = argsort_desc(view(out.s_tilde), rng);
    } else {
        out.s_tilde = out.s;
        out.sigma_tilde = out.sigma;
    }
    return out;
}

UpdateResult update(const RankerState& state, const FeatureMatrix& x, const TopKFeedback& feedback,
                    const ActResult& played, const ContextualConfig& cfg) {
    check_shape(x, cfg);
    if (!(feedback.perm == played.sigma_tilde)) throw ContractError("update: feedback is for a different ranking");
    if (feedback.k < cfg.surrogate.required_k(cfg.m))
        throw ContractError("update: " + cfg.surrogate.name() + " needs top-" +
                            std::to_string(cfg.surrogate.required_k(cfg.m)) + " feedback");
    if (!(played.gamma > 0.0)) throw ConfigError("update: estimator needs gamma > 0");

    const Propensities base = Propensities::make(played.gamma, cfg.m, played.sigma.item_at(0), played.sigma.item_at(1));
    const std::size_t depth = cfg.surrogate.required_k(cfg.m);
    bool mismatch = false;
    for (std::size_t j = 0; j < depth; ++j) mismatch = mismatch || feedback.perm.item_at(j) != played.sigma.item_at(j);

    UpdateResult out;
    out.boosted = mismatch && cfg.mismatch_boost > 1.0;
    const Propensities pr = out.boosted ? base.boosted(cfg.mismatch_boost) : base;
    out.z = estimate_gradient(cfg.surrogate, played.s, feedback, pr, x);
    const double step = cfg.eta_at(state.t) * (cfg.surrogate.is_gain() ? -1.0 : 1.0);
    out.state.w = project_to_ball(state.w - step * out.z, cfg.U);
    out.state.t = state.t + 1;
    return out;
}

void ContextualLog::write_csv(std::ostream& out) const {
    out << "round,explored,boosted,surrogate_loss,avg_ndcg10\n";
    for (const auto& r : rounds)
        out << r.round << ',' << (r.explored ? 1 : 0) << ',' << (r.boosted ? 1 : 0) << ',' << fmt_num(r.surrogate_loss)
            << ',' << fmt_num(r.avg_ndcg10) << '\n';
}

ContextualLog run_contextual(const ContextualConfig& cfg, const std::vector<QueryRecord>& queries,
                             const std::vector<std::size_t>& order, Rng& rng) {
    cfg.validate();
    check_order(queries, order);
    RankerState state = RankerState::initial(cfg.d);
    ContextualLog log;
    log.rounds.reserve(order.size());
    const std::size_t depth = cfg.feedback_depth();
    for (std::size_t q : order) {
        const QueryRecord& rec = queries[q];
        const ActResult played = act(state, rec.x, cfg, rng);
        const TopKFeedback fb = observe_top_k(played.sigma_tilde, rec.r, depth);
        const double loss = value(cfg.surrogate, played.s_tilde, rec.r);
        const double nd = ndcg10(played.sigma_tilde, rec.r);
        UpdateResult up = update(state, rec.x, fb, played, cfg);
        state = std::move(up.state);
        push(log, played.explored, up.boosted, loss, nd);
    }
    log.final_w = state.w;
    return log;
}

ContextualLog run_listnet_baseline(const std::vector<QueryRecord>& queries, const std::vector<std::size_t>& order,
                                   double U, double c_eta, Rng& rng) {
    if (queries.empty()) throw InputError("listnet baseline: no queries");
    if (!(U > 0.0) || !(c_eta > 0.0)) throw ConfigError("listnet baseline: U and c_eta must be > 0");
    check_order(queries, order);
    const SurrogateId ln = SurrogateId::listnet();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(queries.front().x.cols());
    ContextualLog log;
    log.rounds.reserve(order.size());
    for (std::size_t t = 0; t < order.size(); ++t) {
        const QueryRecord& rec = queries[order[t]];
        const Eigen::VectorXd s = rec.x * w;
        const Permutation sigma = argsort_desc(view(s), rng);
        push(log, false, false, value(ln, s, rec.r), ndcg10(sigma, rec.r));
        const double eta = c_eta / std::sqrt(static_cast<double>(t + 1));
        w = project_to_ball(w - eta * (rec.x.transpose() * gradient(ln, s, rec.r)), U);
    }
    log.final_w = w;
    return log;
}

ContextualLog run_random_baseline(const std::vector<QueryRecord>& queries, const std::vector<std::size_t>& order,
                                  Rng& rng) {
    check_order(queries, order);
    const SurrogateId ln = SurrogateId::listnet();
    ContextualLog log;
    log.rounds.reserve(order.size());
    for (std::size_t q : order) {
        const QueryRecord& rec = queries[q];
        const Eigen::VectorXd s = uniform_scores(rec.size(), rng);
        push(log, true, false, value(ln, s, rec.r), ndcg10(argsort_desc(view(s), rng), rec.r));
    }
    return log;
}

std::vector<std::size_t> sample_query_order(std::size_t num_queries, std::size_t T, std::uint64_t seed) {
    if (num_queries == 0) throw InputError("query order: no queries");
    Rng rng(seed);
    std::vector<std::size_t> order(T);
    for (auto& q : order) q = rng.below(num_queries);
    return order;
}

double fixed_weight_loss(const SurrogateId& id, const Eigen::VectorXd& w, const std::vector<QueryRecord>& queries,
                         const std::vector<std::size_t>& order, std::size_t upto) {
    double total = 0.0;
    for (std::size_t t = 0; t < std::min(upto, order.size()); ++t) {
        const QueryRecord& rec = queries.at(order[t]);
        total += value(id, rec.x * w, rec.r);
    }
    return total;
}

Eigen::VectorXd best_fixed_weight(const SurrogateId& id, const std::vector<QueryRecord>& queries,
                                  const std::vector<std::size_t>& order, double U, std::size_t passes) {
    if (!id.convex()) throw ContractError("best_fixed_weight: needs a convex surrogate");
    if (queries.empty() || order.empty()) throw InputError("best_fixed_weight: empty stream");
    check_order(queries, order);
    std::vector<double> weight(queries.size(), 0.0);
    for (std::size_t q : order) weight[q] += 1.0 / static_cast<double>(order.size());

    auto objective = [&](const Eigen::VectorXd& w) {
        double f = 0.0;
        for (std::size_t q = 0; q < queries.size(); ++q)
            if (weight[q] > 0.0) f += weight[q] * value(id, queries[q].x * w, queries[q].r);
        return f;
    };
    auto grad = [&](const Eigen::VectorXd& w) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
        for (std::size_t q = 0; q < queries.size(); ++q)
            if (weight[q] > 0.0) g += weight[q] * (queries[q].x.transpose() * gradient(id, queries[q].x * w, queries[q].r));
        return g;
    };

    Eigen::VectorXd w = Eigen::VectorXd::Zero(queries.front().x.cols());
    double f = objective(w);
    double eta = 1.0;
    for (std::size_t pass = 0; pass < passes; ++pass) {
        const Eigen::VectorXd cand = project_to_ball(w - eta * grad(w), U);
        const double fc = objective(cand);
        if (fc < f) {
            w = cand;
            f = fc;
        } else {
            eta *= 0.5;
        }
    }
    return w;
}

}  // namespace rtopk
