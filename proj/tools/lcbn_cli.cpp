// Command-line front end: simulate, fit, check-id, experiment.
//
// Exit codes: 0 success/pass, 2 input error, 3 non-convergence (results are
// still written), 4 identifiability fail, 5 unknown verdict.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lcbn/errors.hpp"
#include "lcbn/experiments.hpp"
#include "lcbn/identifiability.hpp"
#include "lcbn/inference.hpp"
#include "lcbn/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int default_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> grid;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) grid.push_back(std::stod(cur));
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    return grid;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, int replicate) {
    const auto t0 = std::chrono::steady_clock::now();
    const lcbn::ExperimentConfig cfg = lcbn::load_experiment_configs(config_path).front();

    std::vector<lcbn::PatternBits> latent;
    const lcbn::Dataset data = lcbn::generate_dataset(cfg, replicate, &latent);

    fs::create_directories(out_dir);
    json resolved = lcbn::experiment_config_to_json(cfg);
    resolved["replicate"] = replicate;
    const json manifest =
        lcbn::manifest_json("simulate", resolved, {config_path}, cfg.seed, seconds_since(t0));
    const std::string manifest_line = "manifest: " + manifest.dump();

    lcbn::write_responses_csv((fs::path(out_dir) / "responses.csv").string(), data, manifest_line);
    lcbn::write_q_csv((fs::path(out_dir) / "q.csv").string(), cfg.q, manifest_line);
    lcbn::write_hierarchy_json((fs::path(out_dir) / "hierarchy.json").string(), cfg.hierarchy, &manifest);

    json truth{{"manifest", manifest}, {"model", lcbn::to_string(cfg.model)}, {"noise", cfg.noise}};
    if (!cfg.t.t.empty()) truth["t"] = cfg.t.t;
    if (!cfg.p_override.empty()) truth["p_override"] = cfg.p_override;
    const lcbn::TruthSummary ts = lcbn::truth_summary(cfg);
    truth["p_dense"] = ts.p_dense;
    truth["theta"] = ts.theta_flat;
    json pats = json::array();
    for (lcbn::PatternBits b : latent) pats.push_back(lcbn::render_bits(cfg.hierarchy.K(), b));
    truth["latent_patterns"] = pats;
    lcbn::write_json_file((fs::path(out_dir) / "truth.json").string(), truth);

    std::cout << "wrote " << out_dir << "/{responses.csv,q.csv,hierarchy.json,truth.json} (N=" << data.N()
              << ", J=" << data.J() << ")\n";
    return 0;
}

int run_fit(const std::string& responses_path, const std::string& q_path, const std::string& hierarchy_path,
            const std::string& model_name, const std::string& grid_str, const std::string& control_path,
            std::uint64_t seed, bool seed_given, int threads, const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::string> warnings;
    const lcbn::QMatrix q = lcbn::load_q_csv(q_path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const lcbn::Dataset data = lcbn::load_responses_csv(responses_path);
    if (data.J() != q.J())
        throw lcbn::InputError("responses have " + std::to_string(data.J()) + " columns but Q has " +
                               std::to_string(q.J()) + " rows");

    const lcbn::ModelType model = lcbn::model_from_string(model_name);
    lcbn::Control ctrl;
    std::vector<double> grid;
    if (!control_path.empty()) {
        // the control file may also carry the lambda grid and the seed;
        // command-line flags win when both are present
        json cj = lcbn::read_json_file(control_path);
        if (cj.contains("lambda_grid")) {
            grid = cj["lambda_grid"].get<std::vector<double>>();
            cj.erase("lambda_grid");
        }
        if (cj.contains("seed")) {
            if (!seed_given) seed = cj["seed"].get<std::uint64_t>();
            cj.erase("seed");
        }
        ctrl = lcbn::control_from_json(cj);
    }
    ctrl.seed = seed;
    if (threads > 0) ctrl.threads = threads;

    if (!grid_str.empty()) grid = parse_grid(grid_str);
    if (grid.empty()) grid = lcbn::default_lambda_grid();

    json report;
    bool converged = true;
    std::vector<std::string> inputs{responses_path, q_path};
    json config{{"model", model_name},
                {"lambda_grid", grid},
                {"seed", seed},
                {"control",
                 {{"max_iter", ctrl.max_iter},
                  {"tol", ctrl.tol},
                  {"restarts", ctrl.restarts},
                  {"rho_n", ctrl.rho_n},
                  {"threads", ctrl.threads}}}};

    if (!hierarchy_path.empty()) {
        const lcbn::Hierarchy h = lcbn::load_hierarchy(hierarchy_path);
        inputs.push_back(hierarchy_path);
        config["hierarchy"] = lcbn::hierarchy_to_json(h);
        const lcbn::FitResult fit = lcbn::lcbn_em_fit(data, q, model, h, ctrl);
        report = lcbn::fit_report_json(fit);
        converged = fit.converged;
    } else {
        const lcbn::TwoStepResult fit = lcbn::two_step_fit(data, q, model, grid, ctrl);
        report = lcbn::fit_report_json(fit, grid);
        converged = fit.step2.converged && fit.step1.per_lambda[fit.step1.chosen_index].converged;
    }

    report["manifest"] = lcbn::manifest_json("fit", config, inputs, seed, seconds_since(t0));
    lcbn::write_json_file(out_path, report);
    std::cout << "wrote " << out_path << " (loglik=" << report["loglik"].get<double>()
              << ", ebic=" << report["ebic"].get<double>() << ")\n";
    if (!converged) {
        std::cerr << "warning: EM did not converge within the iteration limit\n";
        return 3;
    }
    return 0;
}

int run_check_id(const std::string& q_path, const std::string& hierarchy_path, const std::string& theorem,
                 long budget, const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const lcbn::QMatrix q = lcbn::load_q_csv(q_path);
    const lcbn::Hierarchy h = lcbn::load_hierarchy(hierarchy_path);

    lcbn::ConditionReport rep;
    if (theorem == "dina-strict") {
        rep = lcbn::check_dina_strict(q, h, budget);
    } else if (theorem == "linear-necessary") {
        rep = lcbn::check_linear_necessary(q, h);
    } else if (theorem == "slam-strict" || theorem == "generic") {
        const lcbn::PatternSet a = lcbn::enumerate_permissible(h);
        const lcbn::GammaMatrix g = lcbn::build_gamma(q, a);
        const lcbn::GammaMatrix gc = lcbn::build_gamma(q, a.complement());
        rep = theorem == "slam-strict" ? lcbn::check_slam_strict(g, gc, budget)
                                       : lcbn::check_generic(g, gc, budget);
    } else {
        throw lcbn::InputError("unknown theorem \"" + theorem +
                               "\" (expected dina-strict, linear-necessary, slam-strict, or generic)");
    }

    json out = lcbn::condition_report_json(rep);
    out["manifest"] = lcbn::manifest_json(
        "check-id", json{{"theorem", theorem}, {"budget", budget}}, {q_path, hierarchy_path}, 0,
        seconds_since(t0));
    if (!out_path.empty()) lcbn::write_json_file(out_path, out);
    std::cout << out.dump(2) << "\n";

    switch (rep.overall()) {
        case lcbn::Verdict::Pass: return 0;
        case lcbn::Verdict::Fail: return 4;
        case lcbn::Verdict::Unknown: return 5;
    }
    return 5;
}

int run_experiment(const std::string& config_path, const std::string& out_dir, int threads) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<lcbn::ExperimentConfig> configs = lcbn::load_experiment_configs(config_path);
    fs::create_directories(out_dir);

    std::string csv =
        "setting,method,replicates_ok,replicates_failed,acc_e,acc_a,rmse_theta,rmse_p,rmse_t,"
        "argmin_ebic_pct,argmin_bic_pct\n";
    json archive = json::array();
    json resolved = json::array();
    for (auto& cfg : configs) {
        if (threads > 0) cfg.control.threads = threads;
        const lcbn::MetricsTable table = lcbn::run_experiment(cfg);
        const std::string full = lcbn::metrics_table_csv(table);
        csv += full.substr(full.find('\n') + 1);  // drop the per-table header
        archive.push_back(lcbn::metrics_table_json(table));
        resolved.push_back(lcbn::experiment_config_to_json(cfg));
        std::cout << "setting " << cfg.name << ": replicates_ok=" << table.replicates_ok
                  << " acc_e=" << table.lcbn.acc_e << " rmse_theta=" << table.lcbn.rmse_theta << "\n";
    }

    const json manifest = lcbn::manifest_json("experiment", resolved, {config_path},
                                              configs.front().seed, seconds_since(t0));
    {
        std::ofstream out(fs::path(out_dir) / "metrics.csv");
        out << "# manifest: " << manifest.dump() << "\n" << csv;
    }
    lcbn::write_json_file((fs::path(out_dir) / "replicates.json").string(),
                          json{{"manifest", manifest}, {"tables", archive}});
    std::cout << "wrote " << out_dir << "/metrics.csv and replicates.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent conjunctive Bayesian networks for cognitive diagnosis"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", out_path = "report.json", verdict_path;
    std::string responses_path, q_path, hierarchy_path, model_name = "dina", grid_str, control_path;
    std::string theorem = "dina-strict";
    std::uint64_t seed = 1;
    int threads = default_threads();
    int replicate = 0;
    long budget = 1000000;

    CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic dataset from a config");
    sim->add_option("--config", config_path, "experiment config JSON")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--replicate", replicate, "replicate index");

    CLI::App* fit = app.add_subcommand("fit", "Two-step fit (or one-step with --hierarchy)");
    fit->add_option("--responses", responses_path, "responses CSV")->required();
    fit->add_option("--q", q_path, "Q-matrix CSV")->required();
    fit->add_option("--hierarchy", hierarchy_path, "known hierarchy (skips structure learning)");
    fit->add_option("--model", model_name, "dina | gdina | main-effect");
    fit->add_option("--lambda-grid", grid_str, "comma-separated negative penalties");
    fit->add_option("--control", control_path,
                    "control JSON (max_iter, tol, restarts, rho_n, lambda_grid, seed, ...)");
    auto* seed_opt = fit->add_option("--seed", seed, "random seed");
    fit->add_option("--threads", threads, "worker threads");
    fit->add_option("--out", out_path, "report path");

    CLI::App* chk = app.add_subcommand("check-id", "Run an identifiability checker");
    chk->add_option("--q", q_path, "Q-matrix CSV")->required();
    chk->add_option("--hierarchy", hierarchy_path, "hierarchy JSON or text")->required();
    chk->add_option("--theorem", theorem, "dina-strict | linear-necessary | slam-strict | generic");
    chk->add_option("--budget", budget, "search budget for existential conditions");
    chk->add_option("--out", verdict_path, "verdict JSON path (also printed)");

    CLI::App* exp = app.add_subcommand("experiment", "Run a replicated simulation study");
    exp->add_option("--config", config_path, "experiment config JSON")->required();
    exp->add_option("--out", out_dir, "output directory");
    exp->add_option("--threads", threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(config_path, out_dir, replicate);
        if (fit->parsed())
            return run_fit(responses_path, q_path, hierarchy_path, model_name, grid_str, control_path,
                           seed, seed_opt->count() > 0, threads, out_path);
        if (chk->parsed()) return run_check_id(q_path, hierarchy_path, theorem, budget, verdict_path);
        if (exp->parsed()) return run_experiment(config_path, out_dir, threads);
    } catch (const lcbn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
