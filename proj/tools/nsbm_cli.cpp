// nsbm command line front end: simulate / fit / infer / benchmark / report.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsbm/eval.hpp"
#include "nsbm/io.hpp"
#include "nsbm/model.hpp"
#include "nsbm/mtp.hpp"
#include "nsbm/rng.hpp"
#include "nsbm/sampler.hpp"
#include "nsbm/vem.hpp"

namespace {

struct FitFlags {
    int restarts = -1;
    int max_vem_iters = -1;
    double rel_tol = -1.0;
    double damping = -1.0;

    void apply(nsbm::FitConfig& fc) const {
        if (restarts > 0) fc.restarts = restarts;
        if (max_vem_iters > 0) fc.max_vem_iters = max_vem_iters;
        if (rel_tol > 0.0) fc.rel_tol = rel_tol;
        if (damping >= 0.0) fc.damping = damping;
    }
};

void add_fit_flags(CLI::App* app, FitFlags& flags) {
    app->add_option("--restarts", flags.restarts, "initializer restarts");
    app->add_option("--max-iters", flags.max_vem_iters, "VEM iteration cap");
    app->add_option("--rel-tol", flags.rel_tol, "relative J convergence tolerance");
    app->add_option("--damping", flags.damping, "fixed-point damping in [0,1)");
}

int cmd_simulate(const std::string& spec_path, std::uint64_t seed, bool seed_set,
                 const std::string& out_prefix) {
    auto cfgs = nsbm::parse_scenario_configs(spec_path);
    const nsbm::ScenarioConfig& cfg = cfgs.front();
    const std::uint64_t s = seed_set ? seed : cfg.seed;

    nsbm::Adjacency a;
    nsbm::ObservationMatrix x;
    if (cfg.graph.kind == nsbm::GraphKind::nsbm) {
        auto [state, obs] = nsbm::sample_nsbm(cfg.graph.n, cfg.theta, s);
        a = std::move(state.a);
        x = std::move(obs);
        nsbm::write_labels_csv(out_prefix + "_z.csv", state.z);
    } else {
        a = nsbm::sample_graph(cfg.graph, nsbm::substream(s, 0));
        x = nsbm::noisy_observation(a, cfg.noise, nsbm::substream(s, 1));
    }
    nsbm::write_observation_csv(out_prefix + "_x.csv", x);
    nsbm::write_adjacency_csv(out_prefix + "_a.csv", a);
    std::cout << "wrote " << out_prefix << "_x.csv (" << x.m() << " pairs, "
              << a.edge_count() << " edges)\n";
    return 0;
}

int cmd_fit(const std::string& x_path, int qmax, std::uint64_t seed, const FitFlags& flags,
            const std::string& out_path) {
    const nsbm::ObservationMatrix x = nsbm::read_observation_csv(x_path);
    nsbm::FitConfig fc;
    fc.seed = seed;
    flags.apply(fc);
    const nsbm::SelectQResult sel = nsbm::select_q(x, qmax, fc);
    nsbm::write_fit_json(out_path, sel, x.n);
    std::cout << "Q_hat=" << sel.best_q << " icl=" << sel.fits[sel.best_q - 1]->icl
              << " -> " << out_path << "\n";
    return 0;
}

int cmd_infer(const std::string& x_path, const std::string& fit_path,
              std::vector<double> alphas, const std::string& out_prefix) {
    const nsbm::ObservationMatrix x = nsbm::read_observation_csv(x_path);
    const nsbm::LoadedFit lf = nsbm::read_fit_json(fit_path);
    if (lf.n != x.n)
        throw std::invalid_argument("fit was computed for n=" + std::to_string(lf.n) +
                                    ", data has n=" + std::to_string(x.n));
    if (alphas.empty()) alphas.push_back(0.1);
    const std::vector<double> lv = nsbm::l_values(x, lf.fit.z_hat, lf.fit.theta_hat);
    for (double alpha : alphas) {
        const nsbm::DecisionMatrix dec = nsbm::procedure_vem(x, alpha, lf.fit);
        std::string path = out_prefix;
        if (alphas.size() > 1) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "_alpha%g", alpha);
            path += buf;
        }
        path += ".csv";
        nsbm::write_decisions_csv(path, x, lv, dec);
        std::cout << "alpha=" << alpha << " rejections=" << dec.rejection_count() << " -> "
                  << path << "\n";
    }
    return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_path, int workers,
                  bool print_config) {
    if (print_config) {
        std::cout << nsbm::format_scenario_config(nsbm::ScenarioConfig{});
        return 0;
    }
    auto cfgs = nsbm::parse_scenario_configs(config_path);
    if (workers > 0)
        for (auto& cfg : cfgs) cfg.workers = workers;
    const std::string path = nsbm::run_benchmark(cfgs, out_path);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_report(const std::string& results_path, const std::string& out_path) {
    const auto records = nsbm::read_benchmark_csv(results_path);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << std::setprecision(17);
    out << "scenario,procedure,alpha,metric,value,se\n";
    for (const auto& r : records) {
        out << r.scenario << "," << r.procedure << "," << r.alpha << ",fdr," << r.fdr << ","
            << r.fdr_se << "\n";
        out << r.scenario << "," << r.procedure << "," << r.alpha << ",tdr," << r.tdr << ","
            << r.tdr_se << "\n";
        out << r.scenario << "," << r.procedure << "," << r.alpha << ",mfdr," << r.mfdr
            << ",\n";
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noisy stochastic block model toolkit"};
    app.require_subcommand(1);

    std::string spec_path, x_path, fit_path, config_path, results_path, out_path;
    std::uint64_t seed = 0;
    int qmax = 3;
    int workers = 0;
    bool print_config = false;
    std::vector<double> alphas;
    FitFlags fit_flags;

    auto* sim = app.add_subcommand("simulate", "draw one dataset from a scenario spec");
    sim->add_option("--spec", spec_path, "scenario spec file")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "master seed (overrides spec)");
    sim->add_option("--out", out_path, "output file prefix")->required();

    auto* fitc = app.add_subcommand("fit", "estimate parameters and clusters from X");
    fitc->add_option("--x", x_path, "edge observation CSV")->required();
    fitc->add_option("--qmax", qmax, "largest group count scanned");
    fitc->add_option("--seed", seed, "master seed");
    add_fit_flags(fitc, fit_flags);
    fitc->add_option("--out", out_path, "fit JSON path")->required();

    auto* inf = app.add_subcommand("infer", "FDR-controlled edge decisions from a fit");
    inf->add_option("--x", x_path, "edge observation CSV")->required();
    inf->add_option("--fit", fit_path, "fit JSON from the fit subcommand")->required();
    inf->add_option("--alpha", alphas, "target FDR level, repeatable");
    inf->add_option("--out", out_path, "decisions CSV path prefix")->required();

    auto* bench = app.add_subcommand("benchmark", "Monte Carlo FDR/TDR study");
    bench->add_option("--config", config_path, "scenario config file");
    bench->add_option("--out", out_path, "results CSV path");
    bench->add_option("--workers", workers, "worker threads (0: auto)");
    bench->add_flag("--print-config", print_config, "print a full default scenario and exit");

    auto* rep = app.add_subcommand("report", "pivot results into long-format metric rows");
    rep->add_option("--results", results_path, "benchmark results CSV")->required();
    rep->add_option("--out", out_path, "long-format CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(spec_path, seed, seed_opt->count() > 0, out_path);
        if (fitc->parsed()) return cmd_fit(x_path, qmax, seed, fit_flags, out_path);
        if (inf->parsed()) return cmd_infer(x_path, fit_path, alphas, out_path);
        if (bench->parsed()) {
            if (!print_config && (config_path.empty() || out_path.empty()))
                throw std::invalid_argument("benchmark needs --config and --out");
            return cmd_benchmark(config_path, out_path, workers, print_config);
        }
        if (rep->parsed()) return cmd_report(results_path, out_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
