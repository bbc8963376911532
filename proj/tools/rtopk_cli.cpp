#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rtopk/adversary.hpp"
#include "rtopk/contextual.hpp"
#include "rtopk/csv.hpp"
#include "rtopk/datasets.hpp"
#include "rtopk/errors.hpp"
#include "rtopk/harness.hpp"
#include "rtopk/noncontextual.hpp"
#include "rtopk/partial_monitoring.hpp"

using namespace rtopk;
namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitGridFailure = 3;

// Fills options that were not given on the command line from a flat
// key=value file; keys are long option names without the leading dashes.
void apply_config(CLI::App& cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    for (const auto& item : CLI::ConfigBase().from_config(in)) {
        const std::string key = item.fullname();
        CLI::Option* opt = cmd.get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") throw ConfigError("config: unknown key '" + key + "'");
        if (opt->count() > 0) continue;
        for (const auto& v : item.inputs) opt->add_result(v);
        opt->run_callback();
    }
}

void add_config_option(CLI::App* cmd, std::string& path) {
    cmd->add_option("--config", path, "flat key=value file mirroring the long flags");
}

template <class Log>
void write_log(const Log& log, const std::string& out) {
    if (out.empty() || out == "-") {
        log.write_csv(std::cout);
        return;
    }
    if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw InputError("cannot write " + out);
    log.write_csv(f);
}

// "<stem>_<suffix><ext>" next to out.
std::string sibling(const std::string& out, const std::string& suffix) {
    const fs::path p(out);
    return (p.parent_path() / (p.stem().string() + "_" + suffix + p.extension().string())).string();
}

std::vector<std::uint64_t> seed_list(const std::vector<std::uint64_t>& seeds, std::size_t num_seeds) {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out;
    for (std::size_t i = 1; i <= num_seeds; ++i) out.push_back(i);
    return out;
}

struct ObservabilityArgs {
    std::string measure = "sumloss";
    std::size_t m = 3;
    int n = 1;
    std::string dump;
    std::string config;
};

int run_observability(const ObservabilityArgs& a) {
    const auto game = build_game(MeasureId::parse(a.measure), a.m, a.n);
    std::printf("measure=%s m=%zu n=%d actions=%zu outcomes=%zu\n", game.measure.name().c_str(), game.m, game.n,
                game.num_actions(), game.num_outcomes());
    const auto global = global_observability(game);
    std::printf("global: %s max_residual=%.3e worst_pair=(%s,%s)\n", global.holds ? "holds" : "fails",
                global.max_residual, game.learner_actions[global.worst_pair.first].item_rank_label().c_str(),
                game.learner_actions[global.worst_pair.second].item_rank_label().c_str());
    try {
        const auto pairs = neighbor_pairs(game);
        std::size_t held = 0;
        double worst = 0.0;
        for (const auto& p : pairs) {
            const auto local = local_observability(game, p);
            held += local.holds ? 1 : 0;
            worst = std::max(worst, local.max_residual);
        }
        std::printf("local: %zu/%zu neighbor pairs observable from their own signals, max_residual=%.3e\n", held,
                    pairs.size(), worst);
    } catch (const ContractError&) {
        std::printf("local: no neighbor structure for this measure\n");
    }
    if (!a.dump.empty()) {
        fs::create_directories(a.dump);
        dump_game_csv(game, a.dump);
        std::printf("matrices written to %s\n", a.dump.c_str());
    }
    return 0;
}

struct NoncontextualArgs {
    std::string measure = "dcg";
    std::size_t m = 20;
    std::size_t T = 10000;
    std::size_t k = 1;
    std::size_t K = 0;
    double epsilon = 0.0;
    std::size_t ones = 5;
    double flip = 0.1;
    std::uint64_t seed = 1;
    bool full_info = false;
    std::string out;
    std::string config;
};

int run_noncontextual_cmd(const NoncontextualArgs& a) {
    const MeasureId id = MeasureId::parse(a.measure);
    const auto stream = simulated_stream(a.m, a.ones, a.flip, a.T, a.seed);
    Rng rng(derive_seed(a.seed, 0));
    if (a.full_info) {
        write_log(run_full_information_ftpl(id, a.T, a.epsilon, stream, rng), a.out);
        return 0;
    }
    BlockConfig cfg = plan_blocks(a.T, a.m, a.k, id);
    if (a.K > 0) {
        cfg.K = a.K;
        cfg.epsilon = default_epsilon(id, a.m, a.K, cfg.max_grade);
    }
    if (a.epsilon > 0.0) cfg.epsilon = a.epsilon;
    write_log(run_noncontextual(cfg, stream, rng), a.out);
    return 0;
}

struct ContextualArgs {
    std::string surrogate = "squared";
    std::string data;
    std::size_t queries = 500;
    std::size_t m = 20;
    std::size_t d = 10;
    double noise = 0.1;
    std::size_t T = 20000;
    double U = 1.0;
    double c_gamma = 0.1;
    double c_eta = 0.01;
    double listnet_c_eta = 0.01;
    double boost = 10.0;
    std::uint64_t seed = 1;
    std::vector<std::string> baselines;
    std::string out;
    std::string config;
};

int run_contextual_cmd(const ContextualArgs& a) {
    Dataset data;
    if (a.data.empty()) {
        data = synthesize_contextual(a.queries, a.m, a.d, a.noise, a.seed);
    } else {
        data = load_svmlight_ranking(a.data);
        for (auto& q : data.queries) q = truncate_or_pad(q, a.m);
    }
    const auto order = sample_query_order(data.queries.size(), a.T, derive_seed(a.seed, 7));

    ContextualConfig cfg;
    cfg.surrogate = SurrogateId::parse(a.surrogate);
    cfg.c_gamma = a.c_gamma;
    cfg.c_eta = a.c_eta;
    cfg.U = a.U;
    cfg.mismatch_boost = a.boost;
    cfg.m = a.m;
    cfg.d = data.d;
    Rng rng(derive_seed(a.seed, 0));
    const auto log = run_contextual(cfg, data.queries, order, rng);
    write_log(log, a.out);
    std::fprintf(stderr, "%s: final avg NDCG@10 = %.4f\n", cfg.surrogate.name().c_str(), log.final_avg_ndcg10());

    for (std::size_t b = 0; b < a.baselines.size(); ++b) {
        const std::string& name = a.baselines[b];
        Rng brng(derive_seed(a.seed, 1 + b));
        ContextualLog blog;
        if (name == "listnet")
            blog = run_listnet_baseline(data.queries, order, a.U, a.listnet_c_eta, brng);
        else if (name == "random")
            blog = run_random_baseline(data.queries, order, brng);
        else
            throw ConfigError("unknown baseline '" + name + "'");
        write_log(blog, a.out.empty() || a.out == "-" ? std::string("-") : sibling(a.out, name));
        std::fprintf(stderr, "%s: final avg NDCG@10 = %.4f\n", name.c_str(), blog.final_avg_ndcg10());
    }
    return 0;
}

struct ExperimentArgs {
    std::string scenario = "fig1";
    std::vector<std::uint64_t> seeds;
    std::size_t num_seeds = 20;
    std::string out = "out";
    std::string config;
};

int run_experiment_cmd(ExperimentSpec spec, const ExperimentArgs& a, const std::string& measure) {
    spec.scenario = parse_scenario(a.scenario);
    spec.seeds = seed_list(a.seeds, a.num_seeds);
    spec.out_dir = a.out;
    spec.measure = MeasureId::parse(measure);
    const auto res = run_experiment(spec);
    std::printf("curve,ok,final_median\n");
    for (const auto& p : res.points) {
        if (p.ok)
            std::printf("%s,1,%s\n", p.label.c_str(), fmt_num(quantile(p.final_values, 0.5)).c_str());
        else
            std::printf("%s,0,nan  # %s\n", p.label.c_str(), p.error.c_str());
    }
    return res.all_ok() ? 0 : kExitGridFailure;
}

int run_demo_impossibility() {
    const auto rep = indistinguishability_report();
    std::printf("R      p      p~\n");
    for (std::size_t j = 0; j < rep.pair.support.size(); ++j)
        std::printf("%s  %.2f   %.2f\n", rep.pair.support[j].to_string().c_str(), rep.pair.p[j], rep.pair.p_tilde[j]);
    auto row = [](const char* name, const std::array<double, 3>& v) {
        std::printf("%-14s %.4f %.4f %.4f\n", name, v[0], v[1], v[2]);
    };
    std::printf("\n");
    row("E_p[R]", rep.mean_r_p);
    row("E_p~[R]", rep.mean_r_p_tilde);
    row("E_p[G/Z]", rep.norm_gain_p);
    row("E_p~[G/Z]", rep.norm_gain_p_tilde);
    std::printf("best item under p: %zu, under p~: %zu, argmax differs: %s\n", rep.order_p.item_at(0) + 1,
                rep.order_p_tilde.item_at(0) + 1, rep.argmax_differs ? "yes" : "no");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online learning to rank with top-k feedback"};
    app.require_subcommand(1);

    ObservabilityArgs obs;
    auto* c_obs = app.add_subcommand("observability", "global and local observability of a ranking measure");
    c_obs->add_option("--measure", obs.measure, "sumloss|pl|dcg|ndcg|ndcg@N|precision@N|ap|auc")->capture_default_str();
    c_obs->add_option("--m", obs.m, "number of items")->capture_default_str();
    c_obs->add_option("--n", obs.n, "maximum relevance grade")->capture_default_str();
    c_obs->add_option("--dump-matrices", obs.dump, "directory for loss.csv and feedback.csv");
    add_config_option(c_obs, obs.config);

    NoncontextualArgs nc;
    auto* c_nc = app.add_subcommand("noncontextual", "blocked FTPL with top-k feedback on a simulated stream");
    c_nc->add_option("--measure", nc.measure)->capture_default_str();
    c_nc->add_option("--m", nc.m)->capture_default_str();
    c_nc->add_option("--T", nc.T)->capture_default_str();
    c_nc->add_option("--k", nc.k, "feedback depth")->capture_default_str();
    c_nc->add_option("--K", nc.K, "block count; 0 picks the theoretical value")->capture_default_str();
    c_nc->add_option("--epsilon", nc.epsilon, "perturbation scale; 0 picks the default")->capture_default_str();
    c_nc->add_option("--ones", nc.ones, "relevant items in the hidden truth")->capture_default_str();
    c_nc->add_option("--flip", nc.flip, "per-coordinate corruption probability")->capture_default_str();
    c_nc->add_option("--seed", nc.seed)->capture_default_str();
    c_nc->add_flag("--full-info", nc.full_info, "observe the whole relevance vector every round");
    c_nc->add_option("--out", nc.out, "CSV path; stdout when omitted");
    add_config_option(c_nc, nc.config);

    ContextualArgs cx;
    auto* c_cx = app.add_subcommand("contextual", "online gradient descent with unbiased top-k estimates");
    c_cx->add_option("--surrogate", cx.surrogate, "squared|ranksvm|kl|smoothdcg")->capture_default_str();
    c_cx->add_option("--data", cx.data, "SVMlight ranking file; synthetic data when omitted");
    c_cx->add_option("--queries", cx.queries, "synthetic query count")->capture_default_str();
    c_cx->add_option("--m", cx.m, "documents per query")->capture_default_str();
    c_cx->add_option("--d", cx.d, "synthetic feature dimension")->capture_default_str();
    c_cx->add_option("--noise", cx.noise, "synthetic label noise")->capture_default_str();
    c_cx->add_option("--T", cx.T)->capture_default_str();
    c_cx->add_option("--U", cx.U, "weight ball radius")->capture_default_str();
    c_cx->add_option("--c-gamma", cx.c_gamma)->capture_default_str();
    c_cx->add_option("--c-eta", cx.c_eta)->capture_default_str();
    c_cx->add_option("--listnet-c-eta", cx.listnet_c_eta)->capture_default_str();
    c_cx->add_option("--boost", cx.boost, "exploration scale-up on mismatch rounds")->capture_default_str();
    c_cx->add_option("--seed", cx.seed)->capture_default_str();
    c_cx->add_option("--baselines", cx.baselines, "comma list of listnet,random")->delimiter(',');
    c_cx->add_option("--out", cx.out, "CSV path; baselines go to <stem>_<name>.csv");
    add_config_option(c_cx, cx.config);

    ExperimentArgs ex;
    ExperimentSpec spec;
    std::string ex_measure = "dcg";
    auto* c_ex = app.add_subcommand("experiment", "multi-seed grid with aggregated curves and a plot script");
    c_ex->add_option("--scenario", ex.scenario, "fig1|fig2|fig3|contextual")->capture_default_str();
    c_ex->add_option("--seeds", ex.seeds, "explicit comma list of seeds")->delimiter(',');
    c_ex->add_option("--num-seeds", ex.num_seeds, "seeds 1..N when --seeds is absent")->capture_default_str();
    c_ex->add_option("--out", ex.out, "output directory")->capture_default_str();
    c_ex->add_option("--threads", spec.threads, "0 uses every core")->capture_default_str();
    c_ex->add_option("--log-every", spec.log_every)->capture_default_str();
    c_ex->add_option("--K-list", spec.K_list)->delimiter(',');
    c_ex->add_option("--k-list", spec.k_list)->delimiter(',');
    c_ex->add_option("--K", spec.K)->capture_default_str();
    c_ex->add_option("--k", spec.k)->capture_default_str();
    c_ex->add_option("--m", spec.m)->capture_default_str();
    c_ex->add_option("--T", spec.T)->capture_default_str();
    c_ex->add_option("--ones", spec.ones)->capture_default_str();
    c_ex->add_option("--flip", spec.flip_prob)->capture_default_str();
    c_ex->add_option("--measure", ex_measure)->capture_default_str();
    c_ex->add_option("--surrogates", spec.surrogates)->delimiter(',');
    c_ex->add_option("--queries", spec.queries)->capture_default_str();
    c_ex->add_option("--d", spec.d)->capture_default_str();
    c_ex->add_option("--noise", spec.noise)->capture_default_str();
    c_ex->add_option("--U", spec.U)->capture_default_str();
    c_ex->add_option("--c-gamma", spec.c_gamma)->capture_default_str();
    c_ex->add_option("--c-eta", spec.c_eta)->capture_default_str();
    c_ex->add_option("--listnet-c-eta", spec.listnet_c_eta)->capture_default_str();
    c_ex->add_option("--boost", spec.mismatch_boost)->capture_default_str();
    add_config_option(c_ex, ex.config);

    auto* c_adv = app.add_subcommand("adversary", "adversary constructions");
    c_adv->require_subcommand(1);
    auto* c_demo = c_adv->add_subcommand("demo-impossibility", "two relevance laws with equal marginals and different NDCG orders");

    std::vector<std::string> cmp_dirs;
    std::string cmp_out;
    auto* c_cmp = app.add_subcommand("compare", "final medians and tail slopes of experiment directories");
    c_cmp->add_option("dirs", cmp_dirs, "experiment output directories")->required();
    c_cmp->add_option("--out", cmp_out, "CSV path; stdout when omitted");

    std::size_t syn_queries = 500, syn_m = 20, syn_d = 10;
    double syn_noise = 0.1;
    std::uint64_t syn_seed = 1;
    std::string syn_out;
    auto* c_syn = app.add_subcommand("synthesize", "write a synthetic SVMlight ranking file");
    c_syn->add_option("--queries", syn_queries)->capture_default_str();
    c_syn->add_option("--m", syn_m)->capture_default_str();
    c_syn->add_option("--d", syn_d)->capture_default_str();
    c_syn->add_option("--noise", syn_noise)->capture_default_str();
    c_syn->add_option("--seed", syn_seed)->capture_default_str();
    c_syn->add_option("--out", syn_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_obs->parsed()) {
            apply_config(*c_obs, obs.config);
            return run_observability(obs);
        }
        if (c_nc->parsed()) {
            apply_config(*c_nc, nc.config);
            return run_noncontextual_cmd(nc);
        }
        if (c_cx->parsed()) {
            apply_config(*c_cx, cx.config);
            return run_contextual_cmd(cx);
        }
        if (c_ex->parsed()) {
            apply_config(*c_ex, ex.config);
            return run_experiment_cmd(spec, ex, ex_measure);
        }
        if (c_demo->parsed()) return run_demo_impossibility();
        if (c_cmp->parsed()) {
            const auto rows = compare_report(cmp_dirs);
            if (cmp_out.empty()) {
                write_compare_report(rows, std::cout);
            } else {
                std::ofstream f(cmp_out, std::ios::binary);
                write_compare_report(rows, f);
            }
            return 0;
        }
        if (c_syn->parsed()) {
            write_svmlight_ranking(synthesize_contextual(syn_queries, syn_m, syn_d, syn_noise, syn_seed), syn_out);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitFailure;
}
