// Times the serial reference E-step against the OpenMP kernel on a synthetic
// problem.  Usage: bench_estep [N] [J] [K] [reps] [max_threads]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>
#include <vector>

#include "lcbn/dataset.hpp"
#include "lcbn/estep.hpp"
#include "lcbn/experiments.hpp"
#include "lcbn/inference.hpp"
#include "lcbn/rng.hpp"

using namespace lcbn;

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 2000;
    const int j_items = argc > 2 ? std::atoi(argv[2]) : 24;
    const int k_attrs = argc > 3 ? std::atoi(argv[3]) : 8;
    const int reps = argc > 4 ? std::atoi(argv[4]) : 20;
    const unsigned hc = std::thread::hardware_concurrency();
    const int max_threads = argc > 5 ? std::atoi(argv[5]) : (hc ? static_cast<int>(hc) : 1);

    DiamondFixture fx = diamond_fixture();
    if (k_attrs != 8) {
        std::vector<std::pair<int, int>> edges;
        for (int k = 1; k < k_attrs; ++k) edges.emplace_back(k, k + 1);
        fx.hierarchy = build_hierarchy(k_attrs, edges);
        fx.t.t.assign(static_cast<size_t>(k_attrs), 0.7);
        std::vector<PatternBits> rows;
        for (int r = 0; r < j_items; ++r) rows.push_back(attr_bit(k_attrs, (r % k_attrs) + 1));
        fx.q = QMatrix(j_items, k_attrs, std::move(rows));
    }

    ExperimentConfig cfg;
    cfg.model = ModelType::Dina;
    cfg.n = n;
    cfg.noise = 0.2;
    cfg.hierarchy = fx.hierarchy;
    cfg.t = fx.t;
    cfg.q = fx.q;
    cfg.seed = 7;
    const Dataset data = generate_dataset(cfg, 0);

    const PatternSet full = PatternSet::full(k_attrs);
    const MeasurementParams mp = true_measurement(cfg);
    SaturatedTheta theta = mp.theta_matrix(full);
    for (auto& v : theta.values) v = std::min(std::max(v, 1e-4), 1.0 - 1e-4);
    const LogThetaTable lt = make_log_theta(theta);
    std::vector<double> logp(full.size(), -std::log(static_cast<double>(full.size())));

    std::printf("N=%d J=%d K=%d patterns=%zu reps=%d\n", n, data.J(), k_attrs, full.size(), reps);

    auto time_it = [&](int threads) {
        SuffStats stats;
        // warm up
        if (threads == 0)
            e_step_serial(data, lt, logp, &stats, nullptr);
        else
            e_step_parallel(data, lt, logp, threads, &stats, nullptr);
        const auto t0 = std::chrono::steady_clock::now();
        for (int r = 0; r < reps; ++r) {
            if (threads == 0)
                e_step_serial(data, lt, logp, &stats, nullptr);
            else
                e_step_parallel(data, lt, logp, threads, &stats, nullptr);
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return std::make_pair(sec / reps, stats.loglik);
    };

    const auto [serial_sec, serial_ll] = time_it(0);
    std::printf("%-18s %10.3f ms/iter   loglik %.6f\n", "serial reference", serial_sec * 1e3, serial_ll);
    for (int t = 1; t <= max_threads; t *= 2) {
        const auto [sec, ll] = time_it(t);
        std::printf("openmp %2d threads  %10.3f ms/iter   speedup %5.2fx   |dll| %.3e\n", t, sec * 1e3,
                    serial_sec / sec, std::fabs(ll - serial_ll));
    }
    return 0;
}
