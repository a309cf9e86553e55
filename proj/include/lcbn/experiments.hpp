#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcbn/dataset.hpp"
#include "lcbn/inference.hpp"
#include "lcbn/lcbn_model.hpp"
#include "lcbn/measurement.hpp"
#include "lcbn/qmatrix.hpp"

namespace lcbn {

struct MissingSpec {
    enum class Type { None, Random, Blocks };
    Type type = Type::None;
    double rate = 0.0;          // Random: per-cell missingness probability
    int blocks = 0;             // Blocks: number of item blocks
    int blocks_per_student = 0; // Blocks: consecutive blocks each student sees
};

// One simulation setting: ground truth plus estimation controls.
struct ExperimentConfig {
    std::string name;
    ModelType model = ModelType::Dina;
    int n = 500;
    double noise = 0.1;  // DINA: s_j = g_j = r; GDINA: endpoint probabilities r and 1-r
    int replications = 1;
    std::vector<double> lambda_grid;  // empty means the default ten-value grid
    std::uint64_t seed = 1;
    Hierarchy hierarchy;
    LcbnParams t;
    QMatrix q;
    std::vector<double> p_override;  // over the permissible set, canonical order; empty = conjunctive truth
    MissingSpec missing;
    Control control;

    void validate() const;
};

struct DiamondFixture {
    Hierarchy hierarchy;
    LcbnParams t;
    QMatrix q;
};

// The K=8 two-layer-diamond study design: its hierarchy, the mastery vector
// (0.9, 0.8, 0.8, 0.7, 0.7, 0.7, 0.6, 0.6), and the stacked 24 x 8 design
// matrix [Q1; Q2; I8] with bidiagonal Q1 and upper-bidiagonal Q2.
DiamondFixture diamond_fixture();

// A nine-attribute fixture shaped like a large-scale assessment: the
// hierarchy and mastery probabilities of the TIMSS analysis, with a
// one-attribute-per-item Q spread round-robin over J items.
DiamondFixture timss_shape_fixture(int j_items = 174);

// Measurement truth for a config: DINA with s = g = r, or the equal-effects
// all-effect construction hitting r at the all-zero and 1-r at the all-one
// class of every item.
MeasurementParams true_measurement(const ExperimentConfig& cfg);
std::vector<double> equal_effect_delta(int required, double r);

// Seeded data generation; deterministic per (config seed, replicate).
Dataset generate_dataset(const ExperimentConfig& cfg, int replicate,
                         std::vector<PatternBits>* latent_out = nullptr);

// Per-replicate estimates kept for metric computation and archiving.
struct ReplicateEstimate {
    bool ok = false;
    std::string error;
    double lambda_hat = 0.0;
    std::vector<std::string> step1_selected;  // pattern strings above the threshold
    std::vector<std::string> step2_support;   // permissible set of the fitted hierarchy
    std::vector<double> step1_p_dense;        // 2^K
    std::vector<double> step1_theta_flat;     // model parameter vector
    std::vector<std::pair<int, int>> hierarchy_edges;  // closure of the estimate
    std::vector<double> t_hat;
    std::vector<double> step2_p_dense;
    std::vector<double> step2_theta_flat;
    double step1_ebic = 0.0, step2_ebic = 0.0, step1_bic = 0.0, step2_bic = 0.0;
    double step2_loglik = 0.0;
    bool step2_converged = false;

    // per-fit diagnostics: largest one-iteration objective decrease (step 2
    // marginal log-likelihood, and step-1 penalized objective on iterations
    // with an inactive floor), floor activations, and the largest
    // finite-difference gradient of the complete-data objective at t-hat
    double step2_worst_drop = 0.0;
    double step1_worst_clean_drop = 0.0;
    long step1_clamp_events = 0;
    double t_grad_max = 0.0;
};

struct MethodMetrics {
    std::string method;  // "pem" or "lcbn"
    double acc_e = 0.0;
    double acc_a = 0.0;
    double rmse_theta = 0.0;
    double rmse_p = 0.0;
    double rmse_t = 0.0;  // NaN for the pem row and for misspecified truth
    double argmin_ebic_pct = 0.0;
    double argmin_bic_pct = 0.0;
};

struct MetricsTable {
    std::string setting;
    int replicates_ok = 0;
    int replicates_failed = 0;
    MethodMetrics pem;
    MethodMetrics lcbn;
    std::vector<ReplicateEstimate> replicates;
};

// Flattened truth used by the metric formulas.
struct TruthSummary {
    int K = 0;
    std::vector<double> p_dense;                       // 2^K
    std::vector<double> theta_flat;                    // same layout as the estimates
    std::vector<double> t;                             // empty when truth is not conjunctive
    std::vector<std::pair<int, int>> hierarchy_edges;  // closure
    std::vector<std::string> true_patterns;            // support of p
};

TruthSummary truth_summary(const ExperimentConfig& cfg);

std::vector<double> flatten_theta(const MeasurementParams& mp);

// Aggregates the study metrics over replicates with the exact averaging
// formulas (RMSEs normalized by parameter count times replicate count).
MetricsTable compute_metrics(const TruthSummary& truth, const std::vector<ReplicateEstimate>& reps,
                             const std::string& setting);

// Generate -> two-step fit -> metrics, one replicate at a time; failures
// are recorded and excluded rather than dropped.
MetricsTable run_experiment(const ExperimentConfig& cfg);

}  // namespace lcbn
