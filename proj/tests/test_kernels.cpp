#include <doctest.h>

#include <cmath>

#include "lcbn/estep.hpp"
#include "lcbn/experiments.hpp"
#include "lcbn/inference.hpp"

using namespace lcbn;

namespace {

struct KernelFixture {
    Dataset data;
    LogThetaTable lt;
    std::vector<double> log_p;
};

KernelFixture make_fixture(bool with_missing) {
    const DiamondFixture fx = diamond_fixture();
    ExperimentConfig cfg;
    cfg.model = ModelType::Dina;
    cfg.n = 600;
    cfg.noise = 0.2;
    cfg.seed = 404;
    cfg.hierarchy = fx.hierarchy;
    cfg.t = fx.t;
    cfg.q = fx.q;
    if (with_missing) {
        cfg.missing.type = MissingSpec::Type::Random;
        cfg.missing.rate = 0.4;
    }
    Dataset data = generate_dataset(cfg, 0);

    const PatternSet full = PatternSet::full(8);
    MeasurementParams mp = true_measurement(cfg);
    SaturatedTheta theta = mp.theta_matrix(full);
    std::vector<double> log_p(full.size(), -std::log(256.0));
    return {std::move(data), make_log_theta(theta), std::move(log_p)};
}

}  // namespace

TEST_CASE("parallel kernel agrees with the serial reference") {
    for (bool with_missing : {false, true}) {
        const KernelFixture fx = make_fixture(with_missing);
        SuffStats serial;
        std::vector<double> phi_serial(static_cast<size_t>(fx.data.N()) * fx.lt.M);
        e_step_serial(fx.data, fx.lt, fx.log_p, &serial, phi_serial.data());

        SUBCASE("one worker is bitwise identical") {
            SuffStats par;
            std::vector<double> phi_par(phi_serial.size());
            e_step_parallel(fx.data, fx.lt, fx.log_p, 1, &par, phi_par.data());
            CHECK(par.loglik == serial.loglik);
            CHECK(par.pattern_mass == serial.pattern_mass);
            CHECK(par.item_obs == serial.item_obs);
            CHECK(par.item_correct == serial.item_correct);
            CHECK(phi_par == phi_serial);
        }

        SUBCASE("more workers agree within 1e-9") {
            for (int threads : {2, 3, 4}) {
                SuffStats par;
                std::vector<double> phi_par(phi_serial.size());
                e_step_parallel(fx.data, fx.lt, fx.log_p, threads, &par, phi_par.data());
                CHECK(std::abs(par.loglik - serial.loglik) < 1e-9 * (std::abs(serial.loglik) + 1.0));
                for (size_t m = 0; m < par.pattern_mass.size(); ++m)
                    CHECK(std::abs(par.pattern_mass[m] - serial.pattern_mass[m]) < 1e-9);
                for (size_t i = 0; i < par.item_obs.size(); ++i) {
                    CHECK(std::abs(par.item_obs[i] - serial.item_obs[i]) < 1e-9);
                    CHECK(std::abs(par.item_correct[i] - serial.item_correct[i]) < 1e-9);
                }
                // responsibilities are per-subject, hence identical
                CHECK(phi_par == phi_serial);
            }
        }

        SUBCASE("a fixed worker count reproduces itself bitwise") {
            SuffStats a, b;
            e_step_parallel(fx.data, fx.lt, fx.log_p, 3, &a, nullptr);
            e_step_parallel(fx.data, fx.lt, fx.log_p, 3, &b, nullptr);
            CHECK(a.loglik == b.loglik);
            CHECK(a.pattern_mass == b.pattern_mass);
            CHECK(a.item_obs == b.item_obs);
        }
    }
}

TEST_CASE("loglik kernel equals the accumulating kernel") {
    const KernelFixture fx = make_fixture(true);
    SuffStats stats;
    e_step_serial(fx.data, fx.lt, fx.log_p, &stats, nullptr);
    CHECK(loglik_kernel(fx.data, fx.lt, fx.log_p, 1) == stats.loglik);
    CHECK(std::abs(loglik_kernel(fx.data, fx.lt, fx.log_p, 4) - stats.loglik) <
          1e-9 * std::abs(stats.loglik));
}

TEST_CASE("fits agree across worker counts within tolerance") {
    ExperimentConfig cfg;
    cfg.model = ModelType::Dina;
    cfg.n = 500;
    cfg.noise = 0.15;
    cfg.seed = 21;
    cfg.hierarchy = build_hierarchy(2, {{1, 2}});
    cfg.t = LcbnParams{{0.7, 0.6}};
    cfg.q = QMatrix(6, 2, {0b10u, 0b01u, 0b10u, 0b01u, 0b10u, 0b01u});
    const Dataset data = generate_dataset(cfg, 0);

    Control c1;
    c1.seed = 5;
    c1.restarts = 2;
    Control c4 = c1;
    c4.threads = 4;
    const FitResult f1 = lcbn_em_fit(data, cfg.q, ModelType::Dina, cfg.hierarchy, c1);
    const FitResult f4 = lcbn_em_fit(data, cfg.q, ModelType::Dina, cfg.hierarchy, c4);
    CHECK(std::abs(f1.loglik - f4.loglik) < 1e-6);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(f1.t.t[static_cast<size_t>(k)] - f4.t.t[static_cast<size_t>(k)]) < 1e-6);
}
