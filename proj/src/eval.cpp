#include "nsbm/eval.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nsbm/io.hpp"
#include "nsbm/rng.hpp"

namespace nsbm {

std::pair<double, double> fdp_tdp(const DecisionMatrix& decisions, const Adjacency& a) {
    if (decisions.rejected.size() != a.m())
        throw std::invalid_argument("fdp_tdp: edge sets differ");
    std::size_t rejected = 0, false_rej = 0, true_rej = 0, edges = 0;
    for (std::size_t k = 0; k < a.m(); ++k) {
        const bool rej = decisions.rejected[k] != 0;
        const bool edge = a.edges[k] != 0;
        rejected += rej;
        edges += edge;
        false_rej += (rej && !edge);
        true_rej += (rej && edge);
    }
    const double fdp =
        static_cast<double>(false_rej) / static_cast<double>(std::max<std::size_t>(rejected, 1));
    const double tdp = edges == 0 ? 0.0
                                  : static_cast<double>(true_rej) / static_cast<double>(edges);
    return {fdp, tdp};
}

namespace {

struct RepCell {
    double fdp = 0.0;
    double tdp = 0.0;
    std::size_t false_rej = 0;
    std::size_t rejected = 0;
};

struct RepOutcome {
    bool ok = false;
    std::vector<RepCell> cells;  // procedures x alphas, row major
};

RepCell make_cell(const DecisionMatrix& dec, const Adjacency& a) {
    RepCell c;
    std::tie(c.fdp, c.tdp) = fdp_tdp(dec, a);
    for (std::size_t k = 0; k < a.m(); ++k) {
        c.rejected += dec.rejected[k];
        c.false_rej += (dec.rejected[k] && !a.edges[k]);
    }
    return c;
}

RepOutcome run_replication(const ScenarioConfig& cfg, int rep) {
    const std::uint64_t rep_seed = substream(cfg.seed, static_cast<std::uint64_t>(rep));

    Adjacency a;
    ObservationMatrix x;
    std::vector<int> z_true;
    ModelParams theta_true;
    double sigma0_true;
    const bool is_nsbm = cfg.graph.kind == GraphKind::nsbm;
    if (is_nsbm) {
        auto [state, obs] = sample_nsbm(cfg.graph.n, cfg.theta, rep_seed);
        a = std::move(state.a);
        z_true = std::move(state.z);
        x = std::move(obs);
        theta_true = cfg.theta;
        sigma0_true = cfg.theta.sigma0;
    } else {
        a = sample_graph(cfg.graph, substream(rep_seed, 0));
        x = noisy_observation(a, cfg.noise, substream(rep_seed, 1));
        sigma0_true = cfg.noise.sigma0;
    }

    bool need_fit = false, need_pvalues = false;
    for (const auto& p : cfg.procedures) {
        if (p == "vem" || p == "abh-vem") need_fit = true;
        if (p == "bh" || p == "abh-storey" || p == "abh-vem") need_pvalues = true;
    }

    RepOutcome out;
    out.cells.resize(cfg.procedures.size() * cfg.alphas.size());

    std::vector<double> pvals;
    if (need_pvalues) {
        pvals.resize(x.m());
        for (std::size_t k = 0; k < x.m(); ++k) pvals[k] = p_value(x.values[k], sigma0_true);
    }

    SelectQResult sel;
    try {
        if (need_fit) {
            FitConfig fc = cfg.fit;
            fc.seed = substream(rep_seed, 2);
            sel = select_q(x, cfg.qmax, fc);
        }

        for (std::size_t pi = 0; pi < cfg.procedures.size(); ++pi) {
            const std::string& proc = cfg.procedures[pi];
            for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
                const double alpha = cfg.alphas[ai];
                DecisionMatrix dec;
                if (proc == "vem") {
                    dec = procedure_vem(x, alpha, *sel.fits[sel.best_q - 1]);
                } else if (proc == "oracle") {
                    if (!is_nsbm)
                        throw std::invalid_argument("oracle needs an NSBM scenario");
                    dec = procedure_oracle(x, z_true, theta_true, alpha);
                } else if (proc == "bh") {
                    dec = bh(pvals, alpha);
                } else if (proc == "abh-storey") {
                    dec = abh(pvals, alpha, storey_pi0(pvals));
                } else if (proc == "abh-vem") {
                    dec = abh(pvals, alpha,
                              pi0_pi1(sel.fits[sel.best_q - 1]->theta_hat).first);
                } else {
                    throw std::invalid_argument("unknown procedure: " + proc);
                }
                out.cells[pi * cfg.alphas.size() + ai] = make_cell(dec, a);
            }
        }
        out.ok = true;
    } catch (const std::invalid_argument&) {
        throw;  // configuration errors are not replication noise
    } catch (const std::exception&) {
        out.ok = false;  // fit failure / sub-critical alpha: rep excluded
    }
    return out;
}

}  // namespace

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("NSBM_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<BenchmarkRecord> estimate_fdr_tdr(const ScenarioConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
    for (double a : cfg.alphas)
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha outside (0,1)");

    std::vector<RepOutcome> outcomes(cfg.reps);
    const int workers = std::min(resolve_workers(cfg.workers), cfg.reps);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> config_error{false};
    std::string config_error_msg;
    std::mutex err_mutex;
    auto worker = [&] {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= cfg.reps || config_error.load()) break;
            try {
                outcomes[rep] = run_replication(cfg, rep);
            } catch (const std::exception& ex) {
                std::lock_guard<std::mutex> lk(err_mutex);
                config_error_msg = ex.what();
                config_error = true;
            }
        }
    };
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (config_error) throw std::runtime_error(config_error_msg);

    int failures = 0;
    for (const auto& o : outcomes) failures += o.ok ? 0 : 1;
    if (failures > 0.05 * cfg.reps)
        throw std::runtime_error("estimate_fdr_tdr: more than 5% of replications failed");

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    std::vector<BenchmarkRecord> records;
    for (std::size_t pi = 0; pi < cfg.procedures.size(); ++pi) {
        for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
            BenchmarkRecord rec;
            rec.scenario = cfg.name;
            rec.procedure = cfg.procedures[pi];
            rec.alpha = cfg.alphas[ai];
            rec.failures = failures;
            rec.wall_time_s = wall;

            double sf = 0.0, sf2 = 0.0, st = 0.0, st2 = 0.0;
            std::size_t total_false = 0, total_rej = 0;
            int n_ok = 0;
            for (const auto& o : outcomes) {
                if (!o.ok) continue;
                const RepCell& c = o.cells[pi * cfg.alphas.size() + ai];
                sf += c.fdp;
                sf2 += c.fdp * c.fdp;
                st += c.tdp;
                st2 += c.tdp * c.tdp;
                total_false += c.false_rej;
                total_rej += c.rejected;
                ++n_ok;
            }
            rec.reps = n_ok;
            if (n_ok > 0) {
                rec.fdr = sf / n_ok;
                rec.tdr = st / n_ok;
                const double vf = std::max(sf2 / n_ok - rec.fdr * rec.fdr, 0.0);
                const double vt = std::max(st2 / n_ok - rec.tdr * rec.tdr, 0.0);
                rec.fdr_se = std::sqrt(vf / n_ok);
                rec.tdr_se = std::sqrt(vt / n_ok);
                rec.mfdr = total_rej == 0 ? 0.0
                                          : static_cast<double>(total_false) /
                                                static_cast<double>(total_rej);
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::string run_benchmark(const std::vector<ScenarioConfig>& configs,
                          const std::string& out_path) {
    std::vector<BenchmarkRecord> all;
    for (const auto& cfg : configs) {
        auto recs = estimate_fdr_tdr(cfg);
        all.insert(all.end(), recs.begin(), recs.end());
    }
    write_benchmark_csv(out_path, all);

    std::ofstream prov(out_path + ".provenance.txt");
    if (!prov) throw std::runtime_error("cannot write provenance file");
    prov << "nsbm benchmark provenance\n";
    for (const auto& cfg : configs) prov << "\n" << format_scenario_config(cfg);
    return out_path;
}

}  // namespace nsbm
