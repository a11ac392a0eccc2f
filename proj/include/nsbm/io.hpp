#ifndef NSBM_IO_HPP
#define NSBM_IO_HPP

#include <string>
#include <vector>

#include "nsbm/edges.hpp"
#include "nsbm/eval.hpp"
#include "nsbm/model.hpp"
#include "nsbm/mtp.hpp"
#include "nsbm/vem.hpp"

namespace nsbm {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Edge-list CSV, header "i,j,x", one row per unordered pair, 1-based,
// all m rows required.
void write_observation_csv(const std::string& path, const ObservationMatrix& x);
ObservationMatrix read_observation_csv(const std::string& path);

// Present-edge CSV, header "i,j".
void write_adjacency_csv(const std::string& path, const Adjacency& a);
Adjacency read_adjacency_csv(const std::string& path, int n);

// Node labels, header "i,z", 1-based labels.
void write_labels_csv(const std::string& path, const std::vector<int>& z);

// Fit export: theta tables, labels, J trace, ICL table.
void write_fit_json(const std::string& path, const SelectQResult& sel, int n);
struct LoadedFit {
    int n = 0;
    int best_q = 0;
    FitResult fit;
};
LoadedFit read_fit_json(const std::string& path);

// Decisions CSV: i,j,x,l_value,q_value,rejected.
void write_decisions_csv(const std::string& path, const ObservationMatrix& x,
                         const std::vector<double>& l_vals, const DecisionMatrix& dec);

void write_benchmark_csv(const std::string& path, const std::vector<BenchmarkRecord>& records);
std::vector<BenchmarkRecord> read_benchmark_csv(const std::string& path);

// Scenario config: key/value blocks introduced by "[scenario]".
std::vector<ScenarioConfig> parse_scenario_configs(const std::string& path);
std::string format_scenario_config(const ScenarioConfig& cfg);

}  // namespace nsbm

#endif
