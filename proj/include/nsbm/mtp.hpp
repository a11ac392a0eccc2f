#ifndef NSBM_MTP_HPP
#define NSBM_MTP_HPP

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "nsbm/edges.hpp"
#include "nsbm/model.hpp"
#include "nsbm/vem.hpp"

namespace nsbm {

// Solution set of the l-value threshold inequality: at most two closed
// intervals, ordered and disjoint (possibly unbounded).
struct RejectionRegion {
    struct Interval {
        double lo;
        double hi;
    };
    std::vector<Interval> intervals;  // size 0..2

    bool contains(double x) const {
        for (const auto& iv : intervals)
            if (x >= iv.lo && x <= iv.hi) return true;
        return false;
    }
};

// Per-edge decisions with the q-values that drove them.
struct DecisionMatrix {
    int n = 0;
    std::vector<std::uint8_t> rejected;  // length m
    std::vector<double> q_values;        // length m (empty for p-value procedures)

    std::size_t rejection_count() const {
        std::size_t c = 0;
        for (auto r : rejected) c += r;
        return c;
    }
};

class SubCriticalAlpha : public std::runtime_error {
public:
    SubCriticalAlpha(double alpha, double alpha_star)
        : std::runtime_error("alpha=" + std::to_string(alpha) +
                             " below critical level alpha*=" + std::to_string(alpha_star)),
          alpha(alpha),
          alpha_star(alpha_star) {}
    double alpha;
    double alpha_star;
};

// Quadratic coefficients of the rejection inequality a x^2 + b x + c <= 0.
std::array<double, 3> abc_coefficients(int q, int l, const ModelParams& theta, double t);

RejectionRegion rejection_region(int q, int l, const ModelParams& theta, double t);

// Mass of the rejection region under the null / alternative of theta_prime.
std::pair<double, double> q0_q1(double t, int q, int l, const ModelParams& theta_prime,
                                const ModelParams& theta);

// Boundaries of the increasing part of t -> q0/q1 for one cell.
std::pair<double, double> t1_t2(int q, int l, const ModelParams& theta);

std::pair<double, double> t1_t2_global(const ModelParams& theta);

// Marginal FDR of the l-value thresholding rule at t, evaluated at
// theta' = theta.
double big_q(const ModelParams& theta, double t);

// Generalized inverse of big_q; errors below the critical level.
double t_threshold(const ModelParams& theta, double alpha);

struct AlphaStar {
    bool is_zero;
    double value;  // 0 when is_zero
};
AlphaStar alpha_star(const ModelParams& theta);

std::vector<double> l_values(const ObservationMatrix& x, const std::vector<int>& z_hat,
                             const ModelParams& theta_hat);

std::vector<double> q_values(const ObservationMatrix& x, const std::vector<int>& z_hat,
                             const ModelParams& theta_hat);

DecisionMatrix procedure_vem(const ObservationMatrix& x, double alpha, const FitResult& fit);

DecisionMatrix procedure_oracle(const ObservationMatrix& x, const std::vector<int>& z_true,
                                const ModelParams& theta_true, double alpha);

DecisionMatrix bh(const std::vector<double>& p_values, double alpha);

double storey_pi0(const std::vector<double>& p_values, double lambda = 0.5);

DecisionMatrix abh(const std::vector<double>& p_values, double alpha, double pi0_hat);

}  // namespace nsbm

#endif
