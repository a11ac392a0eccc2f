#ifndef NSBM_MODEL_HPP
#define NSBM_MODEL_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsbm/edges.hpp"

namespace nsbm {

// Symmetric Q x Q table of per-group-pair parameters.
class QTable {
public:
    QTable() = default;
    QTable(int q, double fill) : q_(q), v_(static_cast<std::size_t>(q) * q, fill) {}

    int size() const { return q_; }
    double operator()(int q, int l) const { return v_[static_cast<std::size_t>(q) * q_ + l]; }
    void set(int q, int l, double x) {
        v_[static_cast<std::size_t>(q) * q_ + l] = x;
        v_[static_cast<std::size_t>(l) * q_ + q] = x;
    }
    bool symmetric(double tol = 0.0) const {
        for (int q = 0; q < q_; ++q)
            for (int l = q + 1; l < q_; ++l)
                if (std::abs((*this)(q, l) - (*this)(l, q)) > tol) return false;
        return true;
    }

private:
    int q_ = 0;
    std::vector<double> v_;
};

// Full Gaussian NSBM parameter: group probabilities, connection
// probabilities, null sd, and per-cell alternative mean/sd.
struct ModelParams {
    int Q = 0;
    std::vector<double> pi;
    QTable w;
    double sigma0 = 1.0;
    QTable mu;
    QTable sigma;
};

class InvalidParams : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

const ModelParams& validate_theta(const ModelParams& theta);

// Log Gaussian pdf. sigma > 0 enforced upstream.
inline double log_normal_pdf(double x, double mu, double sigma) {
    static const double kLogSqrt2Pi = 0.9189385332046727;
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

inline double null_density(double x, double sigma0) {
    return std::exp(log_normal_pdf(x, 0.0, sigma0));
}
inline double alt_density(double x, double mu, double sigma) {
    return std::exp(log_normal_pdf(x, mu, sigma));
}

// Standard normal cdf / upper tail.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Posterior probability of no edge given x and the node labels,
// computed as a logistic of log-density differences. Labels 0-based.
double l_value(double x, int q, int l, const ModelParams& theta);

// Complement of l_value: posterior probability of an edge.
double rho_value(double x, int q, int l, const ModelParams& theta);

// Expected proportions of non-connected / connected pairs.
std::pair<double, double> pi0_pi1(const ModelParams& theta);

// Two-sided p-value under the centered Gaussian null.
inline double p_value(double x, double sigma0) {
    return std::erfc(std::abs(x) / (sigma0 * std::sqrt(2.0)));
}

}  // namespace nsbm

#endif
