#include "rtopk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "rtopk/adversary.hpp"
#include "rtopk/contextual.hpp"
#include "rtopk/csv.hpp"
#include "rtopk/noncontextual.hpp"

namespace fs = std::filesystem;

namespace rtopk {

Scenario parse_scenario(const std::string& text) {
    if (text == "fig1") return Scenario::Fig1;
    if (text == "fig2") return Scenario::Fig2;
    if (text == "fig3") return Scenario::Fig3;
    if (text == "contextual") return Scenario::Contextual;
    throw ConfigError("unknown scenario '" + text + "'");
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Fig1: return "fig1";
        case Scenario::Fig2: return "fig2";
        case Scenario::Fig3: return "fig3";
        case Scenario::Contextual: return "contextual";
    }
    return "?";
}

void ExperimentSpec::validate() const {
    if (seeds.empty()) throw ConfigError("experiment: seed list is empty");
    if (out_dir.empty()) throw ConfigError("experiment: output directory is required");
    if (log_every == 0) throw ConfigError("experiment: log_every must be >= 1");
    if (T == 0) throw ConfigError("experiment: T must be >= 1");
    switch (scenario) {
        case Scenario::Fig1:
            if (K_list.empty()) throw ConfigError("experiment: K list is empty");
            break;
        case Scenario::Fig2:
            if (k_list.empty()) throw ConfigError("experiment: k list is empty");
            break;
        case Scenario::Fig3:
            break;
        case Scenario::Contextual:
            if (surrogates.empty()) throw ConfigError("experiment: surrogate list is empty");
            break;
    }
}

bool ExperimentResult::all_ok() const {
    return std::all_of(points.begin(), points.end(), [](const GridOutcome& g) { return g.ok; });
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InputError("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double loglog_slope(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi) {
    if (t.size() != y.size()) throw InputError("loglog_slope: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi || !(y[i] > 0.0) || !(t[i] > 0.0)) continue;
        const double lx = std::log(t[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::nan("");
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (denom == 0.0) return std::nan("");
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

namespace {

// One grid point: a label and a per-seed runner returning (csv body, metric per round).
struct PointRun {
    std::string csv;
    std::vector<double> metric;
};

struct GridPoint {
    std::string label;
    std::function<PointRun(std::uint64_t seed, std::uint64_t learner_seed)> run;
};

std::string strip_header(const std::string& csv, std::size_t stride, std::string* header) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::string out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (row % stride == 0 || row == 1) out += line + '\n';
    }
    return out;
}

PointRun from_noncontextual(const NoncontextualLog& log) {
    PointRun pr;
    std::ostringstream os;
    log.write_csv(os);
    pr.csv = os.str();
    for (const auto& r : log.rounds) pr.metric.push_back(r.avg_regret);
    return pr;
}

PointRun from_contextual(const ContextualLog& log) {
    PointRun pr;
    std::ostringstream os;
    log.write_csv(os);
    pr.csv = os.str();
    for (const auto& r : log.rounds) pr.metric.push_back(r.avg_ndcg10);
    return pr;
}

std::vector<GridPoint> build_grid(const ExperimentSpec& spec) {
    std::vector<GridPoint> grid;
    auto blocked = [spec](std::size_t K, std::size_t k) {
        return [spec, K, k](std::uint64_t seed, std::uint64_t learner_seed) {
            BlockConfig cfg;
            cfg.T = spec.T;
            cfg.m = spec.m;
            cfg.k = k;
            cfg.K = K;
            cfg.measure = spec.measure;
            cfg.transform = transform_for(spec.measure);
            cfg.epsilon = default_epsilon(spec.measure, spec.m, K, cfg.max_grade);
            const auto stream = simulated_stream(spec.m, spec.ones, spec.flip_prob, spec.T, seed);
            Rng rng(learner_seed);
            return from_noncontextual(run_noncontextual(cfg, stream, rng));
        };
    };
    switch (spec.scenario) {
        case Scenario::Fig1:
            for (std::size_t K : spec.K_list) grid.push_back({"K_" + std::to_string(K), blocked(K, spec.k)});
            break;
        case Scenario::Fig2:
            for (std::size_t k : spec.k_list) grid.push_back({"k_" + std::to_string(k), blocked(spec.K, k)});
            break;
        case Scenario::Fig3:
            grid.push_back({"top" + std::to_string(spec.k), blocked(spec.K, spec.k)});
            grid.push_back({"full_info_ftpl", [spec](std::uint64_t seed, std::uint64_t learner_seed) {
                                const auto stream = simulated_stream(spec.m, spec.ones, spec.flip_prob, spec.T, seed);
                                Rng rng(learner_seed);
                                return from_noncontextual(run_full_information_ftpl(spec.measure, spec.T, 0.0, stream, rng));
                            }});
            break;
        case Scenario::Contextual:
            for (const std::string& name : spec.surrogates) {
                grid.push_back({name, [spec, name](std::uint64_t seed, std::uint64_t learner_seed) {
                                    const Dataset data = synthesize_contextual(spec.queries, spec.m, spec.d, spec.noise, seed);
                                    const auto order = sample_query_order(data.queries.size(), spec.T, derive_seed(seed, 7));
                                    Rng rng(learner_seed);
                                    if (name == "listnet")
                                        return from_contextual(
                                            run_listnet_baseline(data.queries, order, spec.U, spec.listnet_c_eta, rng));
                                    if (name == "random") return from_contextual(run_random_baseline(data.queries, order, rng));
                                    ContextualConfig cfg;
                                    cfg.surrogate = SurrogateId::parse(name);
                                    cfg.c_gamma = spec.c_gamma;
                                    cfg.c_eta = spec.c_eta;
                                    cfg.U = spec.U;
                                    cfg.mismatch_boost = spec.mismatch_boost;
                                    cfg.m = spec.m;
                                    cfg.d = spec.d;
                                    return from_contextual(run_contextual(cfg, data.queries, order, rng));
                                }});
            }
            break;
    }
    return grid;
}

void write_plot_script(const ExperimentSpec& spec, const std::vector<GridOutcome>& points) {
    std::ofstream f(fs::path(spec.out_dir) / "plot.py");
    const bool ctx = spec.scenario == Scenario::Contextual;
    f << "# Draws the aggregated curves: median with an interquartile band.\n"
         "import csv\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
         "curves = [";
    for (const auto& p : points)
        if (p.ok) f << "'" << p.label << "', ";
    f << "]\nfig, ax = plt.subplots()\nfor name in curves:\n"
         "    with open('agg/' + name + '.csv') as fh:\n"
         "        rows = list(csv.DictReader(fh))\n"
         "    t = [float(r['round']) for r in rows]\n"
         "    ax.plot(t, [float(r['median']) for r in rows], label=name)\n"
         "    ax.fill_between(t, [float(r['q25']) for r in rows], [float(r['q75']) for r in rows], alpha=0.2)\n"
         "ax.set_xlabel('round')\nax.set_ylabel('"
      << (ctx ? "average NDCG@10" : "average regret") << "')\nax.set_title('" << scenario_name(spec.scenario)
      << "')\nax.legend()\nfig.savefig('" << scenario_name(spec.scenario) << ".png', dpi=120)\n";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto grid = build_grid(spec);
    fs::create_directories(fs::path(spec.out_dir) / "runs");
    fs::create_directories(fs::path(spec.out_dir) / "agg");

    ExperimentResult result;
    result.points.resize(grid.size());
    result.curves.resize(grid.size());

    auto work = [&](std::size_t g) {
        GridOutcome& out = result.points[g];
        out.label = grid[g].label;
        try {
            std::vector<std::vector<double>> metrics;
            std::string header;
            std::ofstream runs(fs::path(spec.out_dir) / "runs" / (out.label + ".csv"));
            for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
                const std::uint64_t seed = spec.seeds[s];
                PointRun pr = grid[g].run(seed, derive_seed(seed, g));
                const std::string body = strip_header(pr.csv, spec.log_every, &header);
                if (s == 0) runs << "seed," << header << '\n';
                std::istringstream lines(body);
                std::string line;
                while (std::getline(lines, line)) runs << seed << ',' << line << '\n';
                out.final_values.push_back(pr.metric.empty() ? 0.0 : pr.metric.back());
                metrics.push_back(std::move(pr.metric));
            }

            AggregateCurve& curve = result.curves[g];
            const std::size_t len = metrics.front().size();
            std::ofstream agg(fs::path(spec.out_dir) / "agg" / (out.label + ".csv"));
            agg << "round,median,q25,q75\n";
            std::vector<double> col(metrics.size());
            for (std::size_t t = 0; t < len; ++t) {
                for (std::size_t s = 0; s < metrics.size(); ++s) col[s] = metrics[s].at(t);
                const double med = quantile(col, 0.5), lo = quantile(col, 0.25), hi = quantile(col, 0.75);
                curve.round.push_back(static_cast<double>(t + 1));
                curve.median.push_back(med);
                curve.q25.push_back(lo);
                curve.q75.push_back(hi);
                if ((t + 1) % spec.log_every == 0 || t == 0 || t + 1 == len)
                    agg << (t + 1) << ',' << fmt_num(med) << ',' << fmt_num(lo) << ',' << fmt_num(hi) << '\n';
            }
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
            result.curves[g] = AggregateCurve{};
        }
    };

    std::size_t threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, grid.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t g = next++; g < grid.size(); g = next++) work(g);
        });
    for (auto& th : pool) th.join();

    write_plot_script(spec, result.points);
    std::ofstream status(fs::path(spec.out_dir) / "status.csv");
    status << "curve,ok,final_median,error\n";
    for (const auto& p : result.points)
        status << p.label << ',' << (p.ok ? 1 : 0) << ','
               << (p.ok ? fmt_num(quantile(p.final_values, 0.5)) : std::string("nan")) << ',' << p.error << '\n';
    return result;
}

std::vector<CurveSummary> compare_report(const std::vector<std::string>& dirs) {
    std::vector<CurveSummary> out;
    for (const std::string& dir : dirs) {
        const fs::path agg = fs::path(dir) / "agg";
        if (!fs::is_directory(agg)) throw SchemaError("compare: " + dir + " has no agg directory");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(agg))
            if (e.path().extension() == ".csv") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const CsvTable t = read_csv(file.string());
            const auto round = t.numeric_column("round");
            const auto med = t.numeric_column("median");
            t.column("q25");
            t.column("q75");
            if (round.empty()) throw SchemaError("compare: " + file.string() + " has no rows");
            std::vector<double> cum(med.size());
            for (std::size_t i = 0; i < med.size(); ++i) cum[i] = med[i] * round[i];
            CurveSummary s;
            s.dir = dir;
            s.curve = file.stem().string();
            s.final_median = med.back();
            s.tail_slope = loglog_slope(round, cum, round.back() / 10.0, round.back());
            out.push_back(s);
        }
    }
    return out;
}

void write_compare_report(const std::vector<CurveSummary>& rows, std::ostream& out) {
    out << "dir,curve,final_median,tail_slope\n";
    for (const auto& r : rows)
        out << r.dir << ',' << r.curve << ',' << fmt_num(r.final_median) << ',' << fmt_num(r.tail_slope) << '\n';
}

}  // namespace rtopk
