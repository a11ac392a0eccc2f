#include "nsbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsbm {

const ModelParams& validate_theta(const ModelParams& theta) {
    if (theta.Q < 1) throw InvalidParams("Q must be >= 1");
    if (static_cast<int>(theta.pi.size()) != theta.Q)
        throw InvalidParams("pi has wrong length");
    double sum = 0.0;
    for (double p : theta.pi) {
        if (!(p > 0.0 && p < 1.0) && !(theta.Q == 1 && p == 1.0))
            throw InvalidParams("pi not a probability vector");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidParams("pi not a probability vector");

    if (theta.w.size() != theta.Q || theta.mu.size() != theta.Q || theta.sigma.size() != theta.Q)
        throw InvalidParams("parameter table has wrong size");
    if (!theta.w.symmetric()) throw InvalidParams("asymmetric w");
    if (!theta.mu.symmetric()) throw InvalidParams("asymmetric mu");
    if (!theta.sigma.symmetric()) throw InvalidParams("asymmetric sigma");
    if (!(theta.sigma0 > 0.0)) throw InvalidParams("sigma0 <= 0");

    for (int q = 0; q < theta.Q; ++q) {
        for (int l = q; l < theta.Q; ++l) {
            if (!(theta.w(q, l) > 0.0 && theta.w(q, l) < 1.0))
                throw InvalidParams("w not in (0,1) at (" + std::to_string(q + 1) + "," +
                                    std::to_string(l + 1) + ")");
            if (!(theta.sigma(q, l) > 0.0))
                throw InvalidParams("sigma <= 0 at (" + std::to_string(q + 1) + "," +
                                    std::to_string(l + 1) + ")");
            if (theta.mu(q, l) == 0.0 && theta.sigma(q, l) == theta.sigma0)
                throw InvalidParams("null equals alternative at (" + std::to_string(q + 1) +
                                    "," + std::to_string(l + 1) + ")");
        }
    }
    return theta;
}

namespace {

// keep posteriors strictly inside (0,1) even where the logistic saturates
inline double clamp_open(double p) {
    static const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(p, std::numeric_limits<double>::min(), hi);
}

}  // namespace

double l_value(double x, int q, int l, const ModelParams& theta) {
    // l = 1 / (1 + exp(s)), s = log(w/(1-w)) + log g_nu(x) - log g_0(x)
    const double w = theta.w(q, l);
    const double s = std::log(w) - std::log1p(-w) +
                     log_normal_pdf(x, theta.mu(q, l), theta.sigma(q, l)) -
                     log_normal_pdf(x, 0.0, theta.sigma0);
    if (s > 0) {
        const double e = std::exp(-s);
        return clamp_open(e / (1.0 + e));
    }
    return clamp_open(1.0 / (1.0 + std::exp(s)));
}

double rho_value(double x, int q, int l, const ModelParams& theta) {
    return clamp_open(1.0 - l_value(x, q, l, theta));
}

std::pair<double, double> pi0_pi1(const ModelParams& theta) {
    double p0 = 0.0, p1 = 0.0;
    for (int q = 0; q < theta.Q; ++q) {
        for (int l = 0; l < theta.Q; ++l) {
            const double pp = theta.pi[q] * theta.pi[l];
            p0 += pp * (1.0 - theta.w(q, l));
            p1 += pp * theta.w(q, l);
        }
    }
    return {p0, p1};
}

}  // namespace nsbm
