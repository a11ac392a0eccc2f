#ifndef NSBM_EVAL_HPP
#define NSBM_EVAL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nsbm/mtp.hpp"
#include "nsbm/sampler.hpp"
#include "nsbm/vem.hpp"

namespace nsbm {

struct BenchmarkRecord {
    std::string scenario;
    std::string procedure;  // vem | oracle | bh | abh-storey | abh-vem
    double alpha = 0.0;
    double fdr = 0.0;
    double tdr = 0.0;
    double mfdr = 0.0;
    double fdr_se = 0.0;
    double tdr_se = 0.0;
    int reps = 0;  // successful replications
    int failures = 0;
    double wall_time_s = 0.0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    GraphSpec graph;           // graph.kind == nsbm means theta drives everything
    ModelParams theta;         // nsbm kind only
    NoiseSpec noise;           // fixed/random-graph kinds
    std::vector<double> alphas = {0.1};
    int reps = 100;
    std::uint64_t seed = 0;
    std::vector<std::string> procedures = {"vem", "bh"};
    int qmax = 3;
    FitConfig fit;
    int workers = 0;  // 0: env NSBM_WORKERS, else hardware concurrency
};

// Realized false/true discovery proportions; 0/0 = 0.
std::pair<double, double> fdp_tdp(const DecisionMatrix& decisions, const Adjacency& a);

std::vector<BenchmarkRecord> estimate_fdr_tdr(const ScenarioConfig& config);

// Runs every config, writes the results CSV plus a provenance file
// next to it; returns the results path.
std::string run_benchmark(const std::vector<ScenarioConfig>& configs,
                          const std::string& out_path);

int resolve_workers(int requested);

}  // namespace nsbm

#endif
