#pragma once

// Monte-Carlo benchmark harness: runs a pipeline over R simulated
// replicates of one experiment configuration and aggregates coverage,
// interval width, selection error rates, joint coverage and per-coefficient
// summaries. Aggregation folds per-replicate partials in replicate order,
// so reports are byte-identical across thread counts.

#include <cstdint>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "infer.hpp"

namespace mnr::bench {

struct Band {
    std::string metric; // see evaluate_bands for the accepted names
    double lo;
    double hi;
};

struct SelectRule {
    bool enabled = false;
    infer::Adjust adjust = infer::Adjust::bh;
    double alpha = 0.05;
};

struct ExperimentConfig {
    std::string name;
    datagen::CovSpec cov;
    std::size_t n = 0;
    datagen::ModelSpec model;
    std::string pipeline = "mnr"; // mnr | mnr_screen | causal | desparsified
    infer::MnrConfig mnr;         // selection/blanket/cap knobs for mnr pipelines
    int replicates = 100;
    double level = 0.95;
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> joint_sets; // 0-based feature sets
    SelectRule select_rule;
    std::vector<int> track_coefs; // 0-based features whose estimates are tracked
    std::vector<Band> bands;
};

// Pooled mean with sd(mean) = sqrt(pooled sample variance / replicates);
// count is the pool size after dropping failed features/replicates.
struct GroupStats {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t count = 0;
};

struct JointCoverage {
    std::vector<int> features; // 0-based
    double rate = 0.0;
    std::size_t count = 0; // replicates evaluated
};

struct CoefStats {
    int feature = -1; // 0-based
    double mean = 0.0;
    double sd = 0.0; // across replicates, divisor count-1
    std::size_t count = 0;
};

struct MetricsTable {
    std::string name;
    std::string pipeline;
    datagen::Family family = datagen::Family::gaussian;
    std::size_t n = 0, p = 0;
    int replicates = 0;
    double level = 0.95;
    std::uint64_t seed = 0;

    GroupStats coverage_signal, coverage_noise;
    GroupStats width_signal, width_noise;

    bool has_selection = false;
    double fsr = 0.0, nsr = 0.0;

    std::vector<JointCoverage> joint;
    std::vector<CoefStats> coefs;

    int failed_replicates = 0;   // pipeline-level aborts
    int error_replicates = 0;    // replicates with >= 1 per-feature failure
    int feature_errors = 0;      // total per-feature failures
    int flagged_records = 0;     // estimable-but-suspect records (e.g. separation)
    int causal_fallbacks = 0;
    double max_grad_norm = 0.0;  // largest score sup-norm seen at any subset MLE
};

MetricsTable run_experiment(const ExperimentConfig &cfg, int threads = 1);

// FSR = sum FP / sum |selected| (0 when nothing selected anywhere),
// NSR = sum missed signals / (R * |S*|).
std::pair<double, double> compute_fsr_nsr(const std::vector<std::vector<int>> &selected,
                                          const std::vector<int> &signal,
                                          std::size_t replicates);

struct BandResult {
    Band band;
    double value = 0.0;
    bool pass = false;
};

// Metric names: coverage_signal, coverage_noise, width_signal, width_noise,
// fsr, nsr, failure_rate, max_grad_norm, coef_mean:<F> (1-based feature),
// joint_coverage (expands to one result per joint set).
std::vector<BandResult> evaluate_bands(const MetricsTable &table,
                                       const std::vector<Band> &bands);

std::string metrics_to_json(const MetricsTable &table);
MetricsTable metrics_from_json(const std::string &text);
std::string metrics_to_csv(const MetricsTable &table);
std::string metrics_to_markdown(const MetricsTable &table);

ExperimentConfig config_from_json(const std::string &text);
std::string config_to_json(const ExperimentConfig &cfg);

} // namespace mnr::bench
