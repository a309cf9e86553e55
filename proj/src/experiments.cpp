#include "lcbn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcbn/errors.hpp"
#include "lcbn/rng.hpp"

namespace lcbn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rmse(double sq_sum, double count) { return count > 0 ? std::sqrt(sq_sum / count) : kNaN; }

}  // namespace

void ExperimentConfig::validate() const {
    if (n < 1) throw InputError("N must be positive");
    if (replications < 1) throw InputError("replication count must be at least 1");
    if (model == ModelType::Dina && !(noise >= 0.0 && noise < 0.5))
        throw InputError("DINA noise level must lie in [0, 0.5)");
    if (model == ModelType::Gdina && !(noise > 0.0 && noise < 0.5))
        throw InputError("GDINA noise level must lie in (0, 0.5)");
    if (hierarchy.K() < 1) throw InputError("config is missing a hierarchy");
    if (q.K() != hierarchy.K()) throw InputError("Q-matrix and hierarchy disagree on K");
    if (p_override.empty()) {
        if (t.K() != hierarchy.K()) throw InputError("t vector length must equal K");
        t.validate_sampling();
    }
    if (missing.type == MissingSpec::Type::Random && !(missing.rate >= 0.0 && missing.rate < 1.0))
        throw InputError("missingness rate must lie in [0, 1)");
    if (missing.type == MissingSpec::Type::Blocks &&
        (missing.blocks < 1 || missing.blocks_per_student < 1 || missing.blocks_per_student > missing.blocks))
        throw InputError("block missingness needs 1 <= blocks_per_student <= blocks");
    for (double l : lambda_grid)
        if (!(l < 0.0)) throw InputError("lambda grid entries must be negative");
}

DiamondFixture diamond_fixture() {
    DiamondFixture f;
    f.hierarchy = build_hierarchy(8, {{1, 2}, {1, 3}, {2, 4}, {2, 5}, {2, 6}, {3, 4}, {3, 5}, {3, 6},
                                      {4, 7}, {4, 8}, {5, 7}, {5, 8}, {6, 7}, {6, 8}});
    f.t = LcbnParams{{0.9, 0.8, 0.8, 0.7, 0.7, 0.7, 0.6, 0.6}};

    const int K = 8;
    std::vector<PatternBits> rows;
    for (int i = 1; i <= K; ++i) {  // Q1: diagonal plus subdiagonal
        PatternBits r = attr_bit(K, i);
        if (i > 1) r |= attr_bit(K, i - 1);
        rows.push_back(r);
    }
    for (int i = 1; i <= K; ++i) {  // Q2: diagonal plus superdiagonal
        PatternBits r = attr_bit(K, i);
        if (i < K) r |= attr_bit(K, i + 1);
        rows.push_back(r);
    }
    for (int i = 1; i <= K; ++i) rows.push_back(attr_bit(K, i));  // I8
    f.q = QMatrix(24, K, std::move(rows));
    return f;
}

DiamondFixture timss_shape_fixture(int j_items) {
    DiamondFixture f;
    // attributes in the order DA, DK, DR, GA, GK, GR, NA, NK, NR
    f.hierarchy = build_hierarchy(9, {{2, 1}, {2, 3}, {3, 4}, {3, 9}, {1, 9}, {8, 7}, {7, 9}, {5, 6}});
    f.t = LcbnParams{{0.97, 0.64, 0.91, 0.93, 0.54, 0.96, 0.96, 0.49, 0.995}};
    std::vector<PatternBits> rows;
    rows.reserve(static_cast<size_t>(j_items));
    for (int j = 0; j < j_items; ++j) rows.push_back(attr_bit(9, (j % 9) + 1));
    f.q = QMatrix(j_items, 9, std::move(rows));
    f.q.set_attribute_names({"DA", "DK", "DR", "GA", "GK", "GR", "NA", "NK", "NR"});
    return f;
}

std::vector<double> equal_effect_delta(int required, double r) {
    // intercept r, all 2^m - 1 effects equal, total reaching 1 - r
    const size_t n = size_t{1} << required;
    std::vector<double> d(n, 0.0);
    d[0] = r;
    if (n > 1) {
        const double eff = (1.0 - 2.0 * r) / static_cast<double>(n - 1);
        for (size_t s = 1; s < n; ++s) d[s] = eff;
    }
    return d;
}

MeasurementParams true_measurement(const ExperimentConfig& cfg) {
    MeasurementParams mp;
    mp.model = cfg.model;
    mp.link = LinkType::Identity;
    mp.J = cfg.q.J();
    mp.K = cfg.q.K();
    mp.q = cfg.q.rows();
    if (cfg.model == ModelType::Dina) {
        mp.slip.assign(static_cast<size_t>(mp.J), cfg.noise);
        mp.guess.assign(static_cast<size_t>(mp.J), cfg.noise);
    } else if (cfg.model == ModelType::Gdina) {
        mp.class_theta.resize(static_cast<size_t>(mp.J));
        for (int j = 0; j < mp.J; ++j)
            mp.class_theta[static_cast<size_t>(j)] =
                class_theta_from_delta(equal_effect_delta(__builtin_popcount(mp.q[static_cast<size_t>(j)]), cfg.noise));
    } else {
        throw InputError("simulation designs cover the DINA and GDINA models");
    }
    return mp;
}

Dataset generate_dataset(const ExperimentConfig& cfg, int replicate, std::vector<PatternBits>* latent_out) {
    cfg.validate();
    const std::uint64_t rep_seed = mix_seed(cfg.seed, 0xdA7Au, static_cast<std::uint64_t>(replicate));

    std::vector<PatternBits> latent;
    if (!cfg.p_override.empty()) {
        const PatternSet support = enumerate_permissible(cfg.hierarchy, cfg.control.enumeration_cap);
        if (cfg.p_override.size() != support.size())
            throw InputError("p override has " + std::to_string(cfg.p_override.size()) +
                             " entries but the permissible set has " + std::to_string(support.size()));
        double total = 0.0;
        for (double v : cfg.p_override) {
            if (v < 0.0) throw InputError("p override entries must be nonnegative");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9) throw InputError("p override must sum to one");
        std::vector<double> cdf(cfg.p_override.size());
        double acc = 0.0;
        for (size_t i = 0; i < cdf.size(); ++i) {
            acc += cfg.p_override[i];
            cdf[i] = acc;
        }
        Rng rng(mix_seed(rep_seed, 0x1a7e47u));
        latent.reserve(static_cast<size_t>(cfg.n));
        for (int i = 0; i < cfg.n; ++i) {
            const double u = rng.uniform();
            const size_t idx = static_cast<size_t>(
                std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            latent.push_back(support[std::min(idx, support.size() - 1)]);
        }
    } else {
        latent = sample_patterns(cfg.t, cfg.hierarchy, cfg.n, mix_seed(rep_seed, 0x1a7e47u));
    }

    const MeasurementParams truth = true_measurement(cfg);
    Rng resp_rng(mix_seed(rep_seed, 0x0b5e55u));
    std::vector<std::int8_t> cells(static_cast<size_t>(cfg.n) * cfg.q.J());
    for (int i = 0; i < cfg.n; ++i)
        for (int j = 1; j <= cfg.q.J(); ++j) {
            const double th = truth.theta(j, latent[static_cast<size_t>(i)]);
            cells[static_cast<size_t>(i) * cfg.q.J() + (j - 1)] = resp_rng.bernoulli(th) ? 1 : 0;
        }

    if (cfg.missing.type == MissingSpec::Type::Random && cfg.missing.rate > 0.0) {
        Rng miss_rng(mix_seed(rep_seed, 0x3155u));
        for (int i = 0; i < cfg.n; ++i) {
            std::int8_t* row = &cells[static_cast<size_t>(i) * cfg.q.J()];
            int kept = 0;
            for (int j = 0; j < cfg.q.J(); ++j) {
                if (miss_rng.bernoulli(cfg.missing.rate))
                    row[j] = Dataset::kMissing;
                else
                    ++kept;
            }
            if (kept == 0) {  // keep every row loadable
                const int j = static_cast<int>(miss_rng.below(static_cast<std::uint64_t>(cfg.q.J())));
                const double th = truth.theta(j + 1, latent[static_cast<size_t>(i)]);
                row[j] = miss_rng.bernoulli(th) ? 1 : 0;
            }
        }
    } else if (cfg.missing.type == MissingSpec::Type::Blocks) {
        Rng miss_rng(mix_seed(rep_seed, 0x3155u));
        const int nb = cfg.missing.blocks;
        for (int i = 0; i < cfg.n; ++i) {
            const int start = static_cast<int>(miss_rng.below(static_cast<std::uint64_t>(nb)));
            std::int8_t* row = &cells[static_cast<size_t>(i) * cfg.q.J()];
            for (int j = 0; j < cfg.q.J(); ++j) {
                const int block = static_cast<int>(static_cast<long>(j) * nb / cfg.q.J());
                const int off = (block - start + nb) % nb;
                if (off >= cfg.missing.blocks_per_student) row[j] = Dataset::kMissing;
            }
        }
    }

    if (latent_out) *latent_out = std::move(latent);
    return Dataset(cfg.n, cfg.q.J(), std::move(cells));
}

std::vector<double> flatten_theta(const MeasurementParams& mp) {
    std::vector<double> out;
    switch (mp.model) {
        case ModelType::Dina:
            for (int j = 0; j < mp.J; ++j) {
                out.push_back(mp.slip[static_cast<size_t>(j)]);
                out.push_back(mp.guess[static_cast<size_t>(j)]);
            }
            break;
        case ModelType::Gdina:
            for (int j = 1; j <= mp.J; ++j)
                for (double d : mp.delta(j)) out.push_back(d);
            break;
        case ModelType::MainEffect:
            for (const auto& co : mp.me_coef)
                for (double d : co) out.push_back(d);
            break;
    }
    return out;
}

TruthSummary truth_summary(const ExperimentConfig& cfg) {
    cfg.validate();
    TruthSummary ts;
    ts.K = cfg.hierarchy.K();
    const PatternSet support = enumerate_permissible(cfg.hierarchy, cfg.control.enumeration_cap);
    ts.p_dense.assign(size_t{1} << ts.K, 0.0);
    if (!cfg.p_override.empty()) {
        for (size_t i = 0; i < support.size(); ++i) ts.p_dense[support[i]] = cfg.p_override[i];
    } else {
        const ProportionVector pv = proportions(cfg.t, cfg.hierarchy, cfg.control.enumeration_cap);
        for (size_t i = 0; i < pv.support.size(); ++i) ts.p_dense[pv.support[i]] = pv.p[i];
        ts.t = cfg.t.t;
    }
    for (size_t i = 0; i < ts.p_dense.size(); ++i)
        if (ts.p_dense[i] > 0.0) ts.true_patterns.push_back(render_bits(ts.K, static_cast<PatternBits>(i)));
    ts.theta_flat = flatten_theta(true_measurement(cfg));
    ts.hierarchy_edges = cfg.hierarchy.closure_edges();
    return ts;
}

MetricsTable compute_metrics(const TruthSummary& truth, const std::vector<ReplicateEstimate>& reps,
                             const std::string& setting) {
    MetricsTable table;
    table.setting = setting;
    table.replicates = reps;
    table.pem.method = "pem";
    table.lcbn.method = "lcbn";

    const double full = static_cast<double>(size_t{1} << truth.K);
    double sq_p1 = 0, sq_p2 = 0, sq_th1 = 0, sq_th2 = 0, sq_t = 0;
    int n_ok = 0, acc_e = 0, acc_a = 0, acc_a1 = 0, win_ebic = 0, win_bic = 0;
    const bool have_t = !truth.t.empty();

    for (const ReplicateEstimate& r : reps) {
        if (!r.ok) {
            ++table.replicates_failed;
            continue;
        }
        ++n_ok;
        for (size_t i = 0; i < truth.p_dense.size(); ++i) {
            const double d1 = r.step1_p_dense[i] - truth.p_dense[i];
            const double d2 = r.step2_p_dense[i] - truth.p_dense[i];
            sq_p1 += d1 * d1;
            sq_p2 += d2 * d2;
        }
        for (size_t i = 0; i < truth.theta_flat.size(); ++i) {
            const double d1 = r.step1_theta_flat[i] - truth.theta_flat[i];
            const double d2 = r.step2_theta_flat[i] - truth.theta_flat[i];
            sq_th1 += d1 * d1;
            sq_th2 += d2 * d2;
        }
        if (have_t)
            for (size_t k = 0; k < truth.t.size(); ++k) {
                const double d = r.t_hat[k] - truth.t[k];
                sq_t += d * d;
            }
        if (r.hierarchy_edges == truth.hierarchy_edges) ++acc_e;
        auto covers = [&](const std::vector<std::string>& selected) {
            for (const std::string& pat : truth.true_patterns)
                if (std::find(selected.begin(), selected.end(), pat) == selected.end()) return false;
            return true;
        };
        if (covers(r.step1_selected)) ++acc_a1;
        if (covers(r.step2_support)) ++acc_a;
        if (r.step2_ebic < r.step1_ebic) ++win_ebic;
        if (r.step2_bic < r.step1_bic) ++win_bic;
    }
    table.replicates_ok = n_ok;
    if (n_ok == 0) return table;

    const double c = static_cast<double>(n_ok);
    const double n_th = static_cast<double>(truth.theta_flat.size());
    table.pem.rmse_p = rmse(sq_p1, full * c);
    table.lcbn.rmse_p = rmse(sq_p2, full * c);
    table.pem.rmse_theta = rmse(sq_th1, n_th * c);
    table.lcbn.rmse_theta = rmse(sq_th2, n_th * c);
    table.pem.rmse_t = kNaN;
    table.lcbn.rmse_t = have_t ? rmse(sq_t, static_cast<double>(truth.t.size()) * c) : kNaN;
    table.pem.acc_e = table.lcbn.acc_e = static_cast<double>(acc_e) / c;
    table.pem.acc_a = static_cast<double>(acc_a1) / c;  // raw step-1 selection
    table.lcbn.acc_a = static_cast<double>(acc_a) / c;  // fitted-model support
    table.lcbn.argmin_ebic_pct = 100.0 * win_ebic / c;
    table.pem.argmin_ebic_pct = 100.0 - table.lcbn.argmin_ebic_pct;
    table.lcbn.argmin_bic_pct = 100.0 * win_bic / c;
    table.pem.argmin_bic_pct = 100.0 - table.lcbn.argmin_bic_pct;
    return table;
}

MetricsTable run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const TruthSummary truth = truth_summary(cfg);
    const std::vector<double> grid = cfg.lambda_grid.empty() ? default_lambda_grid() : cfg.lambda_grid;

    // replicates are independent and carry derived seeds, so the estimates
    // do not depend on the worker count; aggregation order is the index
    const int workers = std::max(1, std::min(cfg.control.threads, cfg.replications));
    std::vector<ReplicateEstimate> reps(static_cast<size_t>(cfg.replications));
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (int c = 0; c < cfg.replications; ++c) {
        ReplicateEstimate& est = reps[static_cast<size_t>(c)];
        try {
            const Dataset data = generate_dataset(cfg, c);
            Control ctrl = cfg.control;
            if (workers > 1) ctrl.threads = 1;
            ctrl.seed = mix_seed(cfg.seed, 0xf17u, static_cast<std::uint64_t>(c));
            const TwoStepResult fit = two_step_fit(data, cfg.q, cfg.model, grid, ctrl);

            const PemResult& s1 = fit.step1.per_lambda[fit.step1.chosen_index];
            est.ok = true;
            est.lambda_hat = fit.step1.lambda_hat;
            for (PatternBits b : s1.selected.patterns())
                est.step1_selected.push_back(render_bits(truth.K, b));
            for (PatternBits b : fit.step2.p.support.patterns())
                est.step2_support.push_back(render_bits(truth.K, b));
            est.step1_p_dense = s1.p;
            est.step1_theta_flat = flatten_theta(s1.theta);
            est.hierarchy_edges = fit.step2.hierarchy.closure_edges();
            est.t_hat = fit.step2.t.t;
            est.step2_p_dense = fit.step2.p.dense();
            est.step2_theta_flat = flatten_theta(fit.step2.theta);
            est.step1_ebic = fit.step1_ebic;
            est.step2_ebic = fit.step2_ebic;
            est.step1_bic = fit.step1_bic;
            est.step2_bic = fit.step2_bic;
            est.step2_loglik = fit.step2.loglik;
            est.step2_converged = fit.step2.converged;

            for (size_t i = 0; i + 1 < fit.step2.loglik_trace.size(); ++i)
                est.step2_worst_drop = std::max(
                    est.step2_worst_drop, fit.step2.loglik_trace[i] - fit.step2.loglik_trace[i + 1]);
            for (const PemResult& pr : fit.step1.per_lambda) {
                for (size_t i = 0; i + 1 < pr.objective_trace.size(); ++i) {
                    est.step1_clamp_events += pr.clamp_trace[i];
                    if (pr.clamp_trace[i] == 0)
                        est.step1_worst_clean_drop =
                            std::max(est.step1_worst_clean_drop,
                                     pr.objective_trace[i] - pr.objective_trace[i + 1]);
                }
            }

            // finite-difference stationarity of the expected complete-data
            // objective in each t coordinate
            const TStats ts = t_update_stats(data, cfg.q, fit.step2.theta, fit.step2.hierarchy,
                                             fit.step2.t, ctrl.threads, ctrl.enumeration_cap);
            for (size_t k = 0; k < fit.step2.t.t.size(); ++k) {
                const double tk = fit.step2.t.t[k];
                const double a = ts.mastered[k], b = ts.ready[k] - ts.mastered[k];
                const double h = std::min({1e-6, tk / 2, (1.0 - tk) / 2});
                auto qfun = [&](double x) { return a * std::log(x) + b * std::log1p(-x); };
                const double grad = (qfun(tk + h) - qfun(tk - h)) / (2.0 * h);
                est.t_grad_max = std::max(est.t_grad_max, std::abs(grad));
            }
        } catch (const Error& e) {
            est.ok = false;
            est.error = e.what();
        } catch (const std::exception& e) {
            est.ok = false;
            est.error = e.what();
        }
    }
    return compute_metrics(truth, reps, cfg.name);
}

}  // namespace lcbn
