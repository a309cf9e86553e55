#pragma once

#include <vector>

#include "lcbn/dataset.hpp"
#include "lcbn/measurement.hpp"

namespace lcbn {

// Log response probabilities for both outcomes, J x M row-major.
struct LogThetaTable {
    int J = 0;
    size_t M = 0;
    std::vector<double> log_theta;
    std::vector<double> log_one_minus;
};

LogThetaTable make_log_theta(const SaturatedTheta& theta);

// Accumulated E-step quantities.  item_obs / item_correct are J x M:
// posterior pattern mass restricted to the observed cells of each item (and
// further to correct responses), which is all any M-step here needs.
struct SuffStats {
    double loglik = 0.0;
    std::vector<double> pattern_mass;
    std::vector<double> item_obs;
    std::vector<double> item_correct;

    void resize(int J, size_t M) {
        loglik = 0.0;
        pattern_mass.assign(M, 0.0);
        item_obs.assign(static_cast<size_t>(J) * M, 0.0);
        item_correct.assign(static_cast<size_t>(J) * M, 0.0);
    }
};

// Reference implementation: plain per-subject loop, no threading.  The
// parallel kernel must agree with this one (bitwise for one thread).
void e_step_serial(const Dataset& data, const LogThetaTable& lt, const std::vector<double>& log_p,
                   SuffStats* stats, double* phi_out);

// OpenMP kernel: subjects split into static per-thread chunks, partial
// accumulators merged in thread order, so results are reproducible for a
// fixed thread count.
void e_step_parallel(const Dataset& data, const LogThetaTable& lt, const std::vector<double>& log_p,
                     int threads, SuffStats* stats, double* phi_out);

// Log-likelihood only (no accumulators).
double loglik_kernel(const Dataset& data, const LogThetaTable& lt, const std::vector<double>& log_p,
                     int threads);

}  // namespace lcbn
