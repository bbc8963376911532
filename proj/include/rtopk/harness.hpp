#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rtopk/measures.hpp"

namespace rtopk {

enum class Scenario { Fig1, Fig2, Fig3, Contextual };

Scenario parse_scenario(const std::string& text);
std::string scenario_name(Scenario s);

struct ExperimentSpec {
    Scenario scenario = Scenario::Fig1;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::size_t threads = 0;    // 0 picks hardware concurrency
    std::size_t log_every = 1;  // row stride of written CSVs

    // Non-contextual grids.
    std::vector<std::size_t> K_list{10, 200, 400};  // fig1
    std::vector<std::size_t> k_list{1, 5, 10};      // fig2
    std::size_t K = 200;                            // fig2, fig3
    std::size_t k = 1;                              // fig1, fig3
    std::size_t m = 20;
    std::size_t T = 10000;
    std::size_t ones = 5;
    double flip_prob = 0.1;
    MeasureId measure = MeasureId::dcg();

    // Contextual grid; "listnet" and "random" name the baselines.
    std::vector<std::string> surrogates{"squared", "ranksvm", "kl", "smoothdcg", "listnet", "random"};
    std::size_t queries = 500;
    std::size_t d = 10;
    double noise = 0.1;
    double U = 1.0;
    double c_gamma = 0.1;
    double c_eta = 0.01;
    double listnet_c_eta = 0.01;
    double mismatch_boost = 10.0;

    void validate() const;
};

struct GridOutcome {
    std::string label;
    bool ok = false;
    std::string error;
    std::vector<double> final_values;  // per seed, in seed-list order
};

struct AggregateCurve {
    std::vector<double> round;
    std::vector<double> median;
    std::vector<double> q25;
    std::vector<double> q75;
};

struct ExperimentResult {
    std::vector<GridOutcome> points;
    std::vector<AggregateCurve> curves;  // parallel to points; empty on failure
    bool all_ok() const;
};

// Runs every grid point (in a worker pool) for every seed and writes
//   runs/<label>.csv  concatenated per-seed logs with a leading seed column
//   agg/<label>.csv   round,median,q25,q75 of the tracked metric
//   plot.py           matplotlib script drawing the aggregated curves
// Non-contextual scenarios track avg_regret; contextual tracks avg_ndcg10.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Linear-interpolated quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

// Least-squares slope of log(y) against log(t) over t in [t_lo, t_hi],
// ignoring non-positive y.
double loglog_slope(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi);

struct CurveSummary {
    std::string dir;
    std::string curve;
    double final_median = 0.0;
    double tail_slope = 0.0;  // log(median*round) vs log(round) over the last decade
};

// Reads agg/*.csv from each directory. Missing columns raise SchemaError.
std::vector<CurveSummary> compare_report(const std::vector<std::string>& dirs);
void write_compare_report(const std::vector<CurveSummary>& rows, std::ostream& out);

}  // namespace rtopk
