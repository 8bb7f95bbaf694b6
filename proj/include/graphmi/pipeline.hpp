#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "graphmi/blackbox.hpp"
#include "graphmi/dataset.hpp"
#include "graphmi/defense.hpp"
#include "graphmi/whitebox.hpp"

namespace gmi {

struct DatasetSpec {
    enum class Kind { kSbm, kFiles };
    Kind kind = Kind::kSbm;
    std::string path;
    SbmParams sbm;
    std::uint64_t seed = 7;
};

struct ModelSpec {
    int hidden = 16;
    int epochs = 200;
    double lr = 0.01;
    double train_fraction = 0.1;
    double val_fraction = 0.2;
    int patience = 20;
    std::string checkpoint;  // load instead of training when non-empty
};

struct AttackSpec {
    std::string method = "graphmi";  // graphmi | ge | rl | none
    GraphMiConfig base;              // base.density.rho == 0 means "use ground truth"
    double mu = 0.01;
    int q = 100;
    RlConfig rl;
};

struct DefenseSpec {
    std::string strategy = "none";  // none | dp | rewire | add | flip
    double p = 0.5;
    double budget_fraction = 0.2;
    DpConfig dp;
    std::vector<double> sweep;  // parameter grid for the sweep verb
};

struct ExperimentConfig {
    DatasetSpec dataset;
    ModelSpec model;
    AttackSpec attack;
    DefenseSpec defense;
    bool baselines = true;
    int influence_quantiles = 0;  // 0 disables the per-stratum influence table
    bool save_scores = false;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string output_dir = "out";
};

// Strict parse: unknown keys and malformed values are rejected.
ExperimentConfig parse_config(const std::string& json_text);
std::string default_config_json();

// Single-run helpers shared with the C API.
AttackSpec parse_attack_spec(const std::string& json_text);
ReconstructionResult run_attack(const GcnModel& model, const Graph& original,
                                const AttackSpec& spec, std::uint64_t seed);

struct TrainSpec {
    ModelSpec model;
    bool use_dp = false;
    DpConfig dp;
    std::uint64_t seed = 0;
};
TrainSpec parse_train_spec(const std::string& json_text);

struct TrainedModel {
    GcnModel model;
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    double test_accuracy = 0.0;
};
TrainedModel train_from_spec(const Graph& g, const TrainSpec& spec);

// Trains the target per seed (with the optional defense applied first), runs
// the configured attack, evaluates against the original edges, and writes
// report.json plus per-seed curve CSVs under out_dir. Returns the report text.
std::string run_pipeline(const std::string& config_json, const std::string& out_dir);

// One pipeline run per sweep parameter; writes sweep.csv and returns a summary.
std::string run_sweep(const std::string& config_json, const std::string& out_dir);

// Recomputes the aggregate block from the per-seed entries; throws on mismatch.
void verify_report(const std::string& report_json);

// Removes every "timing" subtree, for byte-identical re-run comparisons.
std::string strip_timing(const std::string& report_json);

}  // namespace gmi
