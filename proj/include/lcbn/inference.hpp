#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcbn/dataset.hpp"
#include "lcbn/estep.hpp"
#include "lcbn/hierarchy.hpp"
#include "lcbn/lcbn_model.hpp"
#include "lcbn/measurement.hpp"
#include "lcbn/qmatrix.hpp"

namespace lcbn {

struct Control {
    int max_iter = 1000;
    double tol = 1e-6;          // relative change of the (penalized) log-likelihood
    int restarts = 5;
    double rho_n = -1.0;        // proportion threshold; <= 0 means 1/(2N)
    double pem_c = 0.01;        // floor inside the penalized M-step
    double theta_clamp = 1e-4;  // fitted response probabilities stay in [clamp, 1-clamp]
    double t_clamp = 1e-6;
    std::uint64_t seed = 1;
    int threads = 1;
    int enumeration_cap = 20;

    double rho(int n) const { return rho_n > 0.0 ? rho_n : 1.0 / (2.0 * n); }
};

std::vector<double> default_lambda_grid();  // {-0.4, -0.8, ..., -4.0}

// ---- likelihood ----------------------------------------------------------

// Marginal log-likelihood over the observed cells, log-sum-exp inside.
// theta and p must share the same pattern set; NumericalError when any
// response probability lies outside (0,1).
double marginal_loglik(const SaturatedTheta& theta, const ProportionVector& p, const Dataset& data,
                       int threads = 1);

// Posterior pattern probabilities per subject, N x |A| row-major.  Rows sum
// to one; zero-probability patterns get exactly zero.
std::vector<double> responsibilities(const SaturatedTheta& theta, const ProportionVector& p,
                                     const Dataset& data, int threads = 1);

// ---- information criteria -------------------------------------------------

// EBIC = -2 loglik + (m_p + m_theta) log N + 2 log C(2^K - 1 + m_theta, m_p + m_theta)
double ebic(double loglik, long m_p, long m_theta, long n, int K);
double bic(double loglik, long m_p, long m_theta, long n);

// ---- step 1: penalized EM over the saturated pattern space ----------------

// The penalized M-step weight of one pattern: max{c, lambda + posterior mass}.
inline double pem_delta(double c, double lambda, double pattern_mass) {
    const double d = lambda + pattern_mass;
    return d < c ? c : d;
}

struct PemResult {
    double lambda = 0.0;
    MeasurementParams theta;
    std::vector<double> p;  // over all 2^K patterns, canonical order
    PatternSet selected;    // patterns with p above the threshold
    double loglik = 0.0;
    double penalized = 0.0;
    double ebic = 0.0;
    double bic = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // penalized objective at each iteration
    std::vector<int> clamp_trace;         // M-step floor activations per iteration
    std::vector<std::string> warnings;
};

PemResult pem_fit(const Dataset& data, const QMatrix& q, ModelType model, double lambda,
                  const Control& ctrl);

// ---- hierarchy selection over a lambda grid --------------------------------

struct LearnResult {
    Hierarchy hierarchy;
    double lambda_hat = 0.0;
    size_t chosen_index = 0;
    std::vector<PemResult> per_lambda;
    std::vector<std::string> failures;  // one entry per failed grid point
};

LearnResult learn_hierarchy(const Dataset& data, const QMatrix& q, ModelType model,
                            const std::vector<double>& lambda_grid, const Control& ctrl);

// ---- step 2: EM for the conjunctive model with the hierarchy fixed ---------

struct FitResult {
    Hierarchy hierarchy;
    LcbnParams t;
    MeasurementParams theta;
    ProportionVector p;  // over the permissible set of the hierarchy
    double loglik = 0.0;
    double ebic = 0.0;
    double bic = 0.0;
    int iterations = 0;
    bool converged = false;
    std::optional<double> lambda_hat;
    std::vector<double> loglik_trace;
    std::vector<std::string> warnings;  // e.g. fitted DINA monotonicity violations
};

FitResult lcbn_em_fit(const Dataset& data, const QMatrix& q, ModelType model, const Hierarchy& h,
                      const Control& ctrl);

struct TwoStepResult {
    LearnResult step1;
    FitResult step2;
    double step1_ebic = 0.0;
    double step2_ebic = 0.0;
    double step1_bic = 0.0;
    double step2_bic = 0.0;
};

TwoStepResult two_step_fit(const Dataset& data, const QMatrix& q, ModelType model,
                           const std::vector<double>& lambda_grid, const Control& ctrl);

// Complete-data weights of the t-update at given parameters: for each k,
// (mass on "all prerequisites mastered and alpha_k = 1", mass on "all
// prerequisites mastered").  The fixed-point of the t-update and the
// stationary point of the Q-function both live here.
struct TStats {
    std::vector<double> mastered;  // A_k
    std::vector<double> ready;     // A_k + B_k
};
TStats t_update_stats(const Dataset& data, const QMatrix& q, const MeasurementParams& theta,
                      const Hierarchy& h, const LcbnParams& t, int threads = 1,
                      int enumeration_cap = 20);

}  // namespace lcbn
