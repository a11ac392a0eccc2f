#ifndef NSBM_TESTS_HELPERS_HPP
#define NSBM_TESTS_HELPERS_HPP

#include <vector>

#include "nsbm/model.hpp"

namespace nsbm_tests {

// Two-group benchmark parameter: w = c_w * [[0.8,0.2],[0.2,0.8]],
// signal N(mu, sigma^2) on every cell, noise N(0,1).
inline nsbm::ModelParams theta_two_group(double c_w = 1.0, double mu = 2.0,
                                         double sigma = 1.0) {
    nsbm::ModelParams t;
    t.Q = 2;
    t.pi = {0.5, 0.5};
    t.w = nsbm::QTable(2, 0.0);
    t.w.set(0, 0, 0.8 * c_w);
    t.w.set(1, 1, 0.8 * c_w);
    t.w.set(0, 1, 0.2 * c_w);
    t.sigma0 = 1.0;
    t.mu = nsbm::QTable(2, mu);
    t.sigma = nsbm::QTable(2, sigma);
    return t;
}

inline nsbm::ModelParams theta_single(double w, double mu, double sigma,
                                      double sigma0 = 1.0) {
    nsbm::ModelParams t;
    t.Q = 1;
    t.pi = {1.0};
    t.w = nsbm::QTable(1, w);
    t.sigma0 = sigma0;
    t.mu = nsbm::QTable(1, mu);
    t.sigma = nsbm::QTable(1, sigma);
    return t;
}

}  // namespace nsbm_tests

#endif
