#include "lcbn/estep.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lcbn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Processes subjects [row_begin, row_end); accumulates into stats and
// optionally writes normalized responsibilities.
void run_rows(const Dataset& data, const LogThetaTable& lt, const std::vector<double>& log_p,
              int row_begin, int row_end, SuffStats& stats, double* phi_out, std::vector<double>& w,
              std::vector<double>& e) {
    const size_t M = lt.M;
    const std::uint32_t* codes = data.obs_codes().data();

    for (int i = row_begin; i < row_end; ++i) {
        for (size_t m = 0; m < M; ++m) w[m] = log_p[m];

        const std::uint32_t cb = data.row_begin(i), ce = data.row_end(i);
        for (std::uint32_t c = cb; c < ce; ++c) {
            const std::uint32_t code = codes[c];
            const double* row = (code & 1u) ? &lt.log_theta[(code >> 1) * M] : &lt.log_one_minus[(code >> 1) * M];
            for (size_t m = 0; m < M; ++m) w[m] += row[m];
        }

        double mx = kNegInf;
        for (size_t m = 0; m < M; ++m)
            if (w[m] > mx) mx = w[m];

        double sum = 0.0;
        for (size_t m = 0; m < M; ++m) {
            const double v = (w[m] == kNegInf) ? 0.0 : std::exp(w[m] - mx);
            e[m] = v;
            sum += v;
        }
        stats.loglik += mx + std::log(sum);

        const double inv = 1.0 / sum;
        for (size_t m = 0; m < M; ++m) {
            e[m] *= inv;
            stats.pattern_mass[m] += e[m];
        }
        if (phi_out) {
            double* dst = phi_out + static_cast<size_t>(i) * M;
            for (size_t m = 0; m < M; ++m) dst[m] = e[m];
        }

        for (std::uint32_t c = cb; c < ce; ++c) {
            const std::uint32_t code = codes[c];
            double* acc = &stats.item_obs[(code >> 1) * M];
            for (size_t m = 0; m < M; ++m) acc[m] += e[m];
            if (code & 1u) {
                double* acc1 = &stats.item_correct[(code >> 1) * M];
                for (size_t m = 0; m < M; ++m) acc1[m] += e[m];
            }
        }
    }
}

void loglik_rows(const Dataset& data, const LogThetaTable& lt, const std::vector<double>& log_p,
                 int row_begin, int row_end, double& loglik, std::vector<double>& w) {
    const size_t M = lt.M;
    const std::uint32_t* codes = data.obs_codes().data();
    for (int i = row_begin; i < row_end; ++i) {
        for (size_t m = 0; m < M; ++m) w[m] = log_p[m];
        for (std::uint32_t c = data.row_begin(i); c < data.row_end(i); ++c) {
            const std::uint32_t code = codes[c];
            const double* row = (code & 1u) ? &lt.log_theta[(code >> 1) * M] : &lt.log_one_minus[(code >> 1) * M];
            for (size_t m = 0; m < M; ++m) w[m] += row[m];
        }
        double mx = kNegInf;
        for (size_t m = 0; m < M; ++m)
            if (w[m] > mx) mx = w[m];
        double sum = 0.0;
        for (size_t m = 0; m < M; ++m)
            if (w[m] != kNegInf) sum += std::exp(w[m] - mx);
        loglik += mx + std::log(sum);
    }
}

}  // namespace

LogThetaTable make_log_theta(const SaturatedTheta& theta) {
    LogThetaTable lt;
    lt.J = theta.J;
    lt.M = theta.patterns.size();
    lt.log_theta.resize(theta.values.size());
    lt.log_one_minus.resize(theta.values.size());
    for (size_t i = 0; i < theta.values.size(); ++i) {
        lt.log_theta[i] = std::log(theta.values[i]);
        lt.log_one_minus[i] = std::log1p(-theta.values[i]);
    }
    return lt;
}

void e_step_serial(const Dataset& data, const LogThetaTable& lt, const std::vector<double>& log_p,
                   SuffStats* stats, double* phi_out) {
    stats->resize(lt.J, lt.M);
    std::vector<double> w(lt.M), e(lt.M);
    run_rows(data, lt, log_p, 0, data.N(), *stats, phi_out, w, e);
}

void e_step_parallel(const Dataset& data, const LogThetaTable& lt, const std::vector<double>& log_p,
                     int threads, SuffStats* stats, double* phi_out) {
#ifndef _OPENMP
    threads = 1;
#endif
    if (threads <= 1) {
        e_step_serial(data, lt, log_p, stats, phi_out);
        return;
    }
#ifdef _OPENMP
    stats->resize(lt.J, lt.M);
    const int n = data.N();
    const int nchunks = threads;
    std::vector<SuffStats> partial(static_cast<size_t>(nchunks));

#pragma omp parallel num_threads(threads)
    {
        std::vector<double> w(lt.M), e(lt.M);
#pragma omp for schedule(static, 1)
        for (int c = 0; c < nchunks; ++c) {
            const int lo = static_cast<int>(static_cast<long>(n) * c / nchunks);
            const int hi = static_cast<int>(static_cast<long>(n) * (c + 1) / nchunks);
            partial[static_cast<size_t>(c)].resize(lt.J, lt.M);
            run_rows(data, lt, log_p, lo, hi, partial[static_cast<size_t>(c)], phi_out, w, e);
        }
    }

    for (int c = 0; c < nchunks; ++c) {
        const SuffStats& ps = partial[static_cast<size_t>(c)];
        stats->loglik += ps.loglik;
        for (size_t m = 0; m < stats->pattern_mass.size(); ++m) stats->pattern_mass[m] += ps.pattern_mass[m];
        for (size_t i = 0; i < stats->item_obs.size(); ++i) stats->item_obs[i] += ps.item_obs[i];
        for (size_t i = 0; i < stats->item_correct.size(); ++i) stats->item_correct[i] += ps.item_correct[i];
    }
#endif
}

double loglik_kernel(const Dataset& data, const LogThetaTable& lt, const std::vector<double>& log_p,
                     int threads) {
#ifndef _OPENMP
    threads = 1;
#endif
    if (threads <= 1) {
        double ll = 0.0;
        std::vector<double> w(lt.M);
        loglik_rows(data, lt, log_p, 0, data.N(), ll, w);
        return ll;
    }
#ifdef _OPENMP
    const int n = data.N();
    const int nchunks = threads;
    std::vector<double> partial(static_cast<size_t>(nchunks), 0.0);
#pragma omp parallel num_threads(threads)
    {
        std::vector<double> w(lt.M);
#pragma omp for schedule(static, 1)
        for (int c = 0; c < nchunks; ++c) {
            const int lo = static_cast<int>(static_cast<long>(n) * c / nchunks);
            const int hi = static_cast<int>(static_cast<long>(n) * (c + 1) / nchunks);
            loglik_rows(data, lt, log_p, lo, hi, partial[static_cast<size_t>(c)], w);
        }
    }
    double ll = 0.0;
    for (double v : partial) ll += v;
    return ll;
#else
    return 0.0;
#endif
}

}  // namespace lcbn
