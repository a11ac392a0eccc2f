#ifndef NSBM_VEM_HPP
#define NSBM_VEM_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "nsbm/edges.hpp"
#include "nsbm/model.hpp"

namespace nsbm {

constexpr double kTauFloor = 1e-10;

// n x Q responsibility table, rows summing to 1.
struct VariationalParams {
    int n = 0;
    int Q = 0;
    std::vector<double> tau;  // row major, n * Q

    VariationalParams() = default;
    VariationalParams(int n_, int q) : n(n_), Q(q), tau(static_cast<std::size_t>(n_) * q, 0.0) {}

    double operator()(int i, int q) const { return tau[static_cast<std::size_t>(i) * Q + q]; }
    double& operator()(int i, int q) { return tau[static_cast<std::size_t>(i) * Q + q]; }
};

struct FitConfig {
    int max_vem_iters = 500;
    int max_fixedpoint_iters = 100;
    double rel_tol = 1e-6;
    double damping = 0.5;
    int restarts = 10;
    double sigma2_floor = 1e-8;
    std::uint64_t seed = 0;
};

struct FitResult {
    ModelParams theta_hat;
    VariationalParams tau;
    std::vector<int> z_hat;  // 0-based labels
    std::vector<double> j_trace;
    bool converged = false;
    double icl = 0.0;
};

// Per-edge rho and d tables at a fixed theta; shared by the VE-step,
// the M-step and the J criterion.
struct EdgeTables {
    int Q = 0;
    std::vector<double> rho;  // m * Q * Q
    std::vector<double> d;    // m * Q * Q

    double get_rho(std::size_t e, int q, int l) const {
        return rho[(e * Q + q) * Q + l];
    }
    double get_d(std::size_t e, int q, int l) const { return d[(e * Q + q) * Q + l]; }
};

EdgeTables compute_edge_tables(const ObservationMatrix& x, const ModelParams& theta);

double d_term(double x, int q, int l, const ModelParams& theta);

VariationalParams ve_step(const ObservationMatrix& x, const ModelParams& theta,
                          const VariationalParams& tau_init, const FitConfig& config);

// Weighted-mean M-step update; rho evaluated at theta_prev. Cells whose
// kappa mass vanishes are carried over from theta_prev and reported in
// degenerate_cells when non-null.
ModelParams m_step(const ObservationMatrix& x, const VariationalParams& tau,
                   const ModelParams& theta_prev, double sigma2_floor = 1e-8,
                   std::vector<std::pair<int, int>>* degenerate_cells = nullptr);

double j_criterion(const ModelParams& theta, const VariationalParams& tau,
                   const ModelParams& theta_prev, const ObservationMatrix& x);

VariationalParams init_kmeans(const ObservationMatrix& x, int Q, std::uint64_t seed);

FitResult fit(const ObservationMatrix& x, int Q, const FitConfig& config);

double icl(const ObservationMatrix& x, const FitResult& result, int Q);

struct SelectQResult {
    int best_q = 0;  // 1-based group count
    std::vector<std::optional<FitResult>> fits;  // index Q-1
};

SelectQResult select_q(const ObservationMatrix& x, int q_max, const FitConfig& config);

ModelParams permute_theta(const ModelParams& theta, const std::vector<int>& perm);

}  // namespace nsbm

#endif
