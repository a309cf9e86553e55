#include "lcbn/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "lcbn/errors.hpp"
#include "lcbn/rng.hpp"

namespace lcbn {

namespace {

constexpr double kMassFloor = 1e-12;

double clampp(double x, double eps) { return std::min(std::max(x, eps), 1.0 - eps); }

std::vector<double> log_of(const std::vector<double>& p) {
    std::vector<double> out(p.size());
    for (size_t i = 0; i < p.size(); ++i)
        out[i] = p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
    return out;
}

void check_theta_range(const SaturatedTheta& theta) {
    for (double v : theta.values)
        if (!(v > 0.0 && v < 1.0))
            throw NumericalError("response probability " + std::to_string(v) + " outside (0,1)");
}

MeasurementParams init_measurement(ModelType model, const QMatrix& q, LinkType link, Rng& rng) {
    MeasurementParams mp;
    mp.model = model;
    mp.link = link;
    mp.J = q.J();
    mp.K = q.K();
    mp.q = q.rows();
    switch (model) {
        case ModelType::Dina:
            mp.slip.resize(static_cast<size_t>(mp.J));
            mp.guess.resize(static_cast<size_t>(mp.J));
            for (int j = 0; j < mp.J; ++j) {
                mp.slip[static_cast<size_t>(j)] = 1.0 - rng.uniform(0.7, 0.9);
                mp.guess[static_cast<size_t>(j)] = rng.uniform(0.1, 0.3);
            }
            break;
        case ModelType::Gdina:
            mp.class_theta.resize(static_cast<size_t>(mp.J));
            for (int j = 0; j < mp.J; ++j) {
                const size_t ncls = size_t{1} << __builtin_popcount(mp.q[static_cast<size_t>(j)]);
                auto& ct = mp.class_theta[static_cast<size_t>(j)];
                ct.resize(ncls);
                for (size_t c = 0; c + 1 < ncls; ++c) ct[c] = rng.uniform(0.1, 0.3);
                ct[ncls - 1] = rng.uniform(0.7, 0.9);
                if (ncls == 1) ct[0] = rng.uniform(0.3, 0.7);  // constant item
            }
            break;
        case ModelType::MainEffect:
            mp.me_coef.resize(static_cast<size_t>(mp.J));
            for (int j = 0; j < mp.J; ++j) {
                const int m = __builtin_popcount(mp.q[static_cast<size_t>(j)]);
                auto& co = mp.me_coef[static_cast<size_t>(j)];
                co.resize(static_cast<size_t>(m) + 1);
                const double lo = rng.uniform(0.1, 0.3);
                const double hi = rng.uniform(0.7, 0.9);
                if (link == LinkType::Logit) {
                    co[0] = std::log(lo / (1.0 - lo));
                    for (int k = 1; k <= m; ++k)
                        co[static_cast<size_t>(k)] = (std::log(hi / (1.0 - hi)) - co[0]) / m;
                } else {
                    co[0] = lo;
                    for (int k = 1; k <= m; ++k) co[static_cast<size_t>(k)] = (hi - lo) / m;
                }
            }
            break;
    }
    return mp;
}

double item_q_value(const std::vector<double>& mass, const std::vector<double>& cor,
                    const std::vector<double>& theta_c) {
    double v = 0.0;
    for (size_t c = 0; c < mass.size(); ++c) {
        if (mass[c] <= 0.0) continue;
        v += cor[c] * std::log(theta_c[c]) + (mass[c] - cor[c]) * std::log1p(-theta_c[c]);
    }
    return v;
}

// One backtracking gradient-ascent step on the expected complete-data
// log-likelihood of a main-effect item.  Never decreases the objective.
void main_effect_step(std::vector<double>& coef, PatternBits q_row, LinkType link,
                      const std::vector<double>& mass, const std::vector<double>& cor, double clamp) {
    const int m = __builtin_popcount(q_row);
    const size_t ncls = size_t{1} << m;

    auto thetas = [&](const std::vector<double>& co) {
        std::vector<double> th(ncls);
        for (size_t c = 0; c < ncls; ++c) {
            double x = co[0];
            for (int b = 0; b < m; ++b)
                if (c & (size_t{1} << b)) x += co[static_cast<size_t>(b) + 1];
            th[c] = link == LinkType::Logit ? 1.0 / (1.0 + std::exp(-x)) : x;
        }
        return th;
    };

    std::vector<double> th = thetas(coef);
    for (auto& v : th) v = clampp(v, clamp);
    const double q0 = item_q_value(mass, cor, th);

    std::vector<double> grad(coef.size(), 0.0);
    double total_mass = 0.0;
    for (size_t c = 0; c < ncls; ++c) {
        total_mass += mass[c];
        double gc;
        if (link == LinkType::Logit) {
            gc = cor[c] - mass[c] * th[c];
        } else {
            gc = cor[c] / th[c] - (mass[c] - cor[c]) / (1.0 - th[c]);
        }
        grad[0] += gc;
        for (int b = 0; b < m; ++b)
            if (c & (size_t{1} << b)) grad[static_cast<size_t>(b) + 1] += gc;
    }
    if (total_mass <= kMassFloor) return;

    double step = 1.0 / (total_mass + 1.0);
    std::vector<double> cand(coef.size());
    for (int tries = 0; tries < 40; ++tries, step *= 0.5) {
        for (size_t i = 0; i < coef.size(); ++i) cand[i] = coef[i] + step * grad[i];
        std::vector<double> thc = thetas(cand);
        if (link == LinkType::Identity) {
            bool ok = true;
            for (double v : thc)
                if (v < clamp || v > 1.0 - clamp) { ok = false; break; }
            if (!ok) continue;
        }
        if (item_q_value(mass, cor, thc) >= q0) {
            coef = cand;
            return;
        }
    }
    // no ascent direction found at any tried step; keep the current point
}

// Closed-form (DINA / GDINA) or gradient (main-effect) measurement update
// from the E-step accumulators over an explicit pattern set.
void measurement_m_step(MeasurementParams& mp, const SuffStats& stats, const PatternSet& patterns,
                        double clamp) {
    const size_t M = patterns.size();
    switch (mp.model) {
        case ModelType::Dina: {
            for (int j = 0; j < mp.J; ++j) {
                const PatternBits qr = mp.q[static_cast<size_t>(j)];
                const double* n = &stats.item_obs[static_cast<size_t>(j) * M];
                const double* n1 = &stats.item_correct[static_cast<size_t>(j) * M];
                double cap_obs = 0, cap_cor = 0, inc_obs = 0, inc_cor = 0;
                for (size_t c = 0; c < M; ++c) {
                    if (dominates(patterns[c], qr)) {
                        cap_obs += n[c];
                        cap_cor += n1[c];
                    } else {
                        inc_obs += n[c];
                        inc_cor += n1[c];
                    }
                }
                if (cap_obs > kMassFloor) mp.slip[static_cast<size_t>(j)] = 1.0 - clampp(cap_cor / cap_obs, clamp);
                if (inc_obs > kMassFloor) mp.guess[static_cast<size_t>(j)] = clampp(inc_cor / inc_obs, clamp);
            }
            break;
        }
        case ModelType::Gdina: {
            for (int j = 0; j < mp.J; ++j) {
                const PatternBits qr = mp.q[static_cast<size_t>(j)];
                auto& ct = mp.class_theta[static_cast<size_t>(j)];
                std::vector<double> mass(ct.size(), 0.0), cor(ct.size(), 0.0);
                const double* n = &stats.item_obs[static_cast<size_t>(j) * M];
                const double* n1 = &stats.item_correct[static_cast<size_t>(j) * M];
                for (size_t c = 0; c < M; ++c) {
                    const std::uint32_t cls = subset_index(patterns[c], qr);
                    mass[cls] += n[c];
                    cor[cls] += n1[c];
                }
                for (size_t cls = 0; cls < ct.size(); ++cls)
                    if (mass[cls] > kMassFloor) ct[cls] = clampp(cor[cls] / mass[cls], clamp);
            }
            break;
        }
        case ModelType::MainEffect: {
            for (int j = 0; j < mp.J; ++j) {
                const PatternBits qr = mp.q[static_cast<size_t>(j)];
                const size_t ncls = size_t{1} << __builtin_popcount(qr);
                std::vector<double> mass(ncls, 0.0), cor(ncls, 0.0);
                const double* n = &stats.item_obs[static_cast<size_t>(j) * M];
                const double* n1 = &stats.item_correct[static_cast<size_t>(j) * M];
                for (size_t c = 0; c < M; ++c) {
                    const std::uint32_t cls = subset_index(patterns[c], qr);
                    mass[cls] += n[c];
                    cor[cls] += n1[c];
                }
                main_effect_step(mp.me_coef[static_cast<size_t>(j)], qr, mp.link, mass, cor, clamp);
            }
            break;
        }
    }
}

SaturatedTheta clamped_theta_matrix(const MeasurementParams& mp, const PatternSet& a, double clamp) {
    SaturatedTheta th = mp.theta_matrix(a);
    for (auto& v : th.values) v = clampp(v, clamp);
    return th;
}

std::vector<std::string> dina_monotonicity_warnings(const MeasurementParams& mp) {
    std::vector<std::string> w;
    if (mp.model != ModelType::Dina) return w;
    for (int j = 0; j < mp.J; ++j)
        if (1.0 - mp.slip[static_cast<size_t>(j)] <= mp.guess[static_cast<size_t>(j)])
            w.push_back("item " + std::to_string(j + 1) + ": fitted 1-s <= g (s=" +
                        std::to_string(mp.slip[static_cast<size_t>(j)]) +
                        ", g=" + std::to_string(mp.guess[static_cast<size_t>(j)]) + ")");
    return w;
}

}  // namespace

std::vector<double> default_lambda_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 10; ++i) g.push_back(-0.4 * i);
    return g;
}

double marginal_loglik(const SaturatedTheta& theta, const ProportionVector& p, const Dataset& data,
                       int threads) {
    if (!(theta.patterns == p.support)) throw IndexError("theta and p are over different pattern sets");
    if (theta.J != data.J()) throw IndexError("theta row count does not match dataset items");
    check_theta_range(theta);
    const LogThetaTable lt = make_log_theta(theta);
    return loglik_kernel(data, lt, log_of(p.p), threads);
}

std::vector<double> responsibilities(const SaturatedTheta& theta, const ProportionVector& p,
                                     const Dataset& data, int threads) {
    if (!(theta.patterns == p.support)) throw IndexError("theta and p are over different pattern sets");
    if (theta.J != data.J()) throw IndexError("theta row count does not match dataset items");
    check_theta_range(theta);
    const LogThetaTable lt = make_log_theta(theta);
    std::vector<double> phi(static_cast<size_t>(data.N()) * p.support.size());
    SuffStats stats;
    e_step_parallel(data, lt, log_of(p.p), threads, &stats, phi.data());
    return phi;
}

double ebic(double loglik, long m_p, long m_theta, long n, int K) {
    if (m_p < 0 || m_theta < 0) throw DomainError("negative parameter count");
    const double npat = std::pow(2.0, K) - 1.0;
    if (static_cast<double>(m_p) > npat)
        throw DomainError("m_p = " + std::to_string(m_p) + " exceeds 2^K - 1");
    const double nn = npat + static_cast<double>(m_theta);
    const double kk = static_cast<double>(m_p + m_theta);
    const double log_binom = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
    return -2.0 * loglik + static_cast<double>(m_p + m_theta) * std::log(static_cast<double>(n)) +
           2.0 * log_binom;
}

double bic(double loglik, long m_p, long m_theta, long n) {
    return -2.0 * loglik + static_cast<double>(m_p + m_theta) * std::log(static_cast<double>(n));
}

PemResult pem_fit(const Dataset& data, const QMatrix& q, ModelType model, double lambda,
                  const Control& ctrl) {
    if (!(lambda < 0.0)) throw InputError("penalty lambda must be negative, got " + std::to_string(lambda));
    if (q.J() != data.J()) throw IndexError("Q-matrix rows do not match dataset items");
    const int K = q.K();
    if (K > ctrl.enumeration_cap)
        throw CapacityError("2^" + std::to_string(K) + " patterns exceed the enumeration cap");

    const PatternSet full = PatternSet::full(K);
    const size_t M = full.size();
    const double rho = ctrl.rho(data.N());
    const std::uint64_t lambda_key = std::bit_cast<std::uint64_t>(lambda);

    PemResult best;
    double best_obj = -std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < std::max(1, ctrl.restarts); ++restart) {
        Rng rng(mix_seed(ctrl.seed, lambda_key, 0x7e300u + static_cast<std::uint64_t>(restart)));
        MeasurementParams mp = init_measurement(model, q, LinkType::Identity, rng);
        std::vector<double> p(M, 1.0 / static_cast<double>(M));

        auto penalty = [&](const std::vector<double>& pp) {
            double pen = 0.0;
            for (double v : pp) pen += v > rho ? std::log(v) : std::log(rho);
            return lambda * pen;
        };

        std::vector<double> trace;
        std::vector<int> clamp_trace;
        double prev_obj = -std::numeric_limits<double>::infinity();
        double obj = prev_obj;
        SuffStats stats;
        int iter = 0;
        bool converged = false;

        for (iter = 0; iter < ctrl.max_iter; ++iter) {
            const SaturatedTheta theta = clamped_theta_matrix(mp, full, ctrl.theta_clamp);
            const LogThetaTable lt = make_log_theta(theta);
            e_step_parallel(data, lt, log_of(p), ctrl.threads, &stats, nullptr);
            obj = stats.loglik + penalty(p);
            trace.push_back(obj);

            if (iter > 0 && std::abs(obj - prev_obj) / (std::abs(prev_obj) + 1.0) < ctrl.tol) {
                converged = true;
                clamp_trace.push_back(0);  // no M-step after the converged evaluation
                break;
            }
            prev_obj = obj;

            int clamps = 0;
            double total = 0.0;
            for (size_t m = 0; m < M; ++m) {
                const double d = pem_delta(ctrl.pem_c, lambda, stats.pattern_mass[m]);
                if (d == ctrl.pem_c) ++clamps;
                p[m] = d;
                total += d;
            }
            for (size_t m = 0; m < M; ++m) p[m] /= total;
            clamp_trace.push_back(clamps);

            measurement_m_step(mp, stats, full, ctrl.theta_clamp);
        }

        // final objective at the last parameter values
        const SaturatedTheta theta = clamped_theta_matrix(mp, full, ctrl.theta_clamp);
        const double final_ll = loglik_kernel(data, make_log_theta(theta), log_of(p), ctrl.threads);
        const double final_obj = final_ll + penalty(p);

        if (final_obj > best_obj) {
            best_obj = final_obj;
            best.lambda = lambda;
            best.theta = mp;
            best.p = p;
            best.loglik = final_ll;
            best.penalized = final_obj;
            best.iterations = iter;
            best.converged = converged;
            best.objective_trace = std::move(trace);
            best.clamp_trace = std::move(clamp_trace);
        }
    }

    std::vector<PatternBits> sel;
    for (size_t m = 0; m < M; ++m)
        if (best.p[m] > rho) sel.push_back(full[m]);
    if (sel.empty()) throw NumericalError("penalized EM selected no pattern above the threshold");
    best.selected = PatternSet(K, std::move(sel), false);

    const long m_p = static_cast<long>(best.selected.size()) - 1;
    const long m_th = best.theta.m_theta();
    best.ebic = ebic(best.loglik, m_p, m_th, data.N(), K);
    best.bic = bic(best.loglik, m_p, m_th, data.N());
    best.warnings = dina_monotonicity_warnings(best.theta);
    return best;
}

LearnResult learn_hierarchy(const Dataset& data, const QMatrix& q, ModelType model,
                            const std::vector<double>& lambda_grid, const Control& ctrl) {
    if (lambda_grid.empty()) throw InputError("lambda grid is empty");
    for (double l : lambda_grid)
        if (!(l < 0.0)) throw InputError("lambda grid entries must be negative");

    LearnResult out;
    out.per_lambda.resize(lambda_grid.size());
    std::vector<std::string> errors(lambda_grid.size());
    std::vector<char> ok(lambda_grid.size(), 0);

    // grid points are independent; with several workers they run in
    // parallel with single-threaded kernels inside
    const int grid_workers = std::min<int>(ctrl.threads, static_cast<int>(lambda_grid.size()));
    Control point_ctrl = ctrl;
    if (grid_workers > 1) point_ctrl.threads = 1;

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, grid_workers))
    for (size_t i = 0; i < lambda_grid.size(); ++i) {
        try {
            out.per_lambda[i] = pem_fit(data, q, model, lambda_grid[i], point_ctrl);
            ok[i] = 1;
        } catch (const Error& e) {
            errors[i] = "lambda=" + std::to_string(lambda_grid[i]) + ": " + e.what();
        } catch (const std::exception& e) {
            errors[i] = "lambda=" + std::to_string(lambda_grid[i]) + ": " + e.what();
        }
    }

    std::vector<size_t> ok_index;
    for (size_t i = 0; i < lambda_grid.size(); ++i) {
        if (ok[i])
            ok_index.push_back(i);
        else
            out.failures.push_back(errors[i]);
    }
    if (ok_index.empty()) throw NumericalError("every lambda grid point failed: " + out.failures.front());

    size_t chosen = ok_index.front();
    for (size_t idx : ok_index) {
        const PemResult& cand = out.per_lambda[idx];
        const PemResult& cur = out.per_lambda[chosen];
        const double diff = cand.ebic - cur.ebic;
        const double tol = 1e-9 * (std::abs(cur.ebic) + 1.0);
        if (diff < -tol || (std::abs(diff) <= tol && cand.selected.size() < cur.selected.size()))
            chosen = idx;
    }
    out.chosen_index = chosen;
    out.lambda_hat = lambda_grid[chosen];
    try {
        out.hierarchy = reconstruct_hierarchy(out.per_lambda[chosen].selected);
    } catch (const MergedAttributesError& e) {
        throw MergedAttributesError(std::string("hierarchy reconstruction at the selected lambda failed: ") +
                                    e.what());
    }
    return out;
}

FitResult lcbn_em_fit(const Dataset& data, const QMatrix& q, ModelType model, const Hierarchy& h,
                      const Control& ctrl) {
    if (q.J() != data.J()) throw IndexError("Q-matrix rows do not match dataset items");
    if (q.K() != h.K()) throw IndexError("Q-matrix and hierarchy disagree on K");
    const int K = h.K();
    const PatternSet support = enumerate_permissible(h, ctrl.enumeration_cap);
    const size_t M = support.size();

    // per-attribute masks for the t update
    std::vector<PatternBits> pmask(static_cast<size_t>(K) + 1);
    for (int k = 1; k <= K; ++k) pmask[static_cast<size_t>(k)] = h.parent_mask(k);

    auto p_from_t = [&](const std::vector<double>& t) {
        std::vector<double> p(M);
        LcbnParams lp{t};
        for (size_t c = 0; c < M; ++c) p[c] = pattern_prob(lp, h, support[c]);
        return p;
    };

    FitResult best;
    double best_ll = -std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < std::max(1, ctrl.restarts); ++restart) {
        Rng rng(mix_seed(ctrl.seed, 0xa1902u, static_cast<std::uint64_t>(restart)));
        MeasurementParams mp = init_measurement(model, q, LinkType::Identity, rng);
        std::vector<double> t(static_cast<size_t>(K), 0.5);

        std::vector<double> trace;
        double prev_ll = -std::numeric_limits<double>::infinity();
        SuffStats stats;
        int iter = 0;
        bool converged = false;

        for (iter = 0; iter < ctrl.max_iter; ++iter) {
            const std::vector<double> p = p_from_t(t);
            const SaturatedTheta theta = clamped_theta_matrix(mp, support, ctrl.theta_clamp);
            const LogThetaTable lt = make_log_theta(theta);
            e_step_parallel(data, lt, log_of(p), ctrl.threads, &stats, nullptr);
            trace.push_back(stats.loglik);

            if (iter > 0 && std::abs(stats.loglik - prev_ll) / (std::abs(prev_ll) + 1.0) < ctrl.tol) {
                converged = true;
                break;
            }
            prev_ll = stats.loglik;

            for (int k = 1; k <= K; ++k) {
                double mastered = 0.0, ready = 0.0;
                for (size_t c = 0; c < M; ++c) {
                    if (!dominates(support[c], pmask[static_cast<size_t>(k)])) continue;
                    ready += stats.pattern_mass[c];
                    if (has_attr(support[c], K, k)) mastered += stats.pattern_mass[c];
                }
                if (ready > kMassFloor)
                    t[static_cast<size_t>(k - 1)] = clampp(mastered / ready, ctrl.t_clamp);
            }

            measurement_m_step(mp, stats, support, ctrl.theta_clamp);
        }

        // polish t at fixed theta so the returned vector is a fixed point of
        // its own update (E-step plus t-update is still an ascent step)
        {
            const SaturatedTheta theta = clamped_theta_matrix(mp, support, ctrl.theta_clamp);
            const LogThetaTable lt = make_log_theta(theta);
            for (int extra = 0; extra < 500; ++extra) {
                const std::vector<double> p = p_from_t(t);
                e_step_parallel(data, lt, log_of(p), ctrl.threads, &stats, nullptr);
                trace.push_back(stats.loglik);
                double max_step = 0.0;
                for (int k = 1; k <= K; ++k) {
                    double mastered = 0.0, ready = 0.0;
                    for (size_t c = 0; c < M; ++c) {
                        if (!dominates(support[c], pmask[static_cast<size_t>(k)])) continue;
                        ready += stats.pattern_mass[c];
                        if (has_attr(support[c], K, k)) mastered += stats.pattern_mass[c];
                    }
                    if (ready <= kMassFloor) continue;
                    const double next = clampp(mastered / ready, ctrl.t_clamp);
                    max_step = std::max(max_step, std::abs(next - t[static_cast<size_t>(k - 1)]));
                    t[static_cast<size_t>(k - 1)] = next;
                }
                if (max_step < 1e-11) break;
            }
        }

        const std::vector<double> p = p_from_t(t);
        const SaturatedTheta theta = clamped_theta_matrix(mp, support, ctrl.theta_clamp);
        const double final_ll = loglik_kernel(data, make_log_theta(theta), log_of(p), ctrl.threads);

        if (final_ll > best_ll) {
            best_ll = final_ll;
            best.hierarchy = h;
            best.t = LcbnParams{t};
            best.theta = mp;
            best.p = ProportionVector{support, p};
            best.loglik = final_ll;
            best.iterations = iter;
            best.converged = converged;
            best.loglik_trace = std::move(trace);
        }
    }

    const long m_th = best.theta.m_theta();
    best.ebic = ebic(best.loglik, K, m_th, data.N(), K);  // K free latent parameters
    best.bic = bic(best.loglik, K, m_th, data.N());
    best.warnings = dina_monotonicity_warnings(best.theta);
    return best;
}

TwoStepResult two_step_fit(const Dataset& data, const QMatrix& q, ModelType model,
                           const std::vector<double>& lambda_grid, const Control& ctrl) {
    TwoStepResult out;
    out.step1 = learn_hierarchy(data, q, model, lambda_grid, ctrl);
    out.step2 = lcbn_em_fit(data, q, model, out.step1.hierarchy, ctrl);
    out.step2.lambda_hat = out.step1.lambda_hat;
    const PemResult& s1 = out.step1.per_lambda[out.step1.chosen_index];
    out.step1_ebic = s1.ebic;
    out.step1_bic = s1.bic;
    out.step2_ebic = out.step2.ebic;
    out.step2_bic = out.step2.bic;
    return out;
}

TStats t_update_stats(const Dataset& data, const QMatrix& q, const MeasurementParams& theta_params,
                      const Hierarchy& h, const LcbnParams& t, int threads, int enumeration_cap) {
    if (q.J() != theta_params.J) throw IndexError("Q-matrix and measurement parameters disagree on J");
    const int K = h.K();
    const PatternSet support = enumerate_permissible(h, enumeration_cap);
    const size_t M = support.size();
    std::vector<double> p(M);
    for (size_t c = 0; c < M; ++c) p[c] = pattern_prob(t, h, support[c]);

    SaturatedTheta theta = theta_params.theta_matrix(support);
    for (auto& v : theta.values) v = clampp(v, 1e-12);
    SuffStats stats;
    e_step_parallel(data, make_log_theta(theta), log_of(p), threads, &stats, nullptr);

    TStats out;
    out.mastered.assign(static_cast<size_t>(K), 0.0);
    out.ready.assign(static_cast<size_t>(K), 0.0);
    for (int k = 1; k <= K; ++k) {
        for (size_t c = 0; c < M; ++c) {
            if (!dominates(support[c], h.parent_mask(k))) continue;
            out.ready[static_cast<size_t>(k - 1)] += stats.pattern_mass[c];
            if (has_attr(support[c], K, k)) out.mastered[static_cast<size_t>(k - 1)] += stats.pattern_mass[c];
        }
    }
    return out;
}

}  // namespace lcbn
