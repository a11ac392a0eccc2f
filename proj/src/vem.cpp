#include "nsbm/vem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsbm/rng.hpp"

namespace nsbm {

namespace {

class FitFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void normalize_row(double* row, int Q) {
    double sum = 0.0;
    for (int q = 0; q < Q; ++q) sum += row[q];
    for (int q = 0; q < Q; ++q) {
        row[q] = std::max(row[q] / sum, kTauFloor);
    }
    sum = 0.0;
    for (int q = 0; q < Q; ++q) sum += row[q];
    for (int q = 0; q < Q; ++q) row[q] /= sum;
}

}  // namespace

double d_term(double x, int q, int l, const ModelParams& theta) {
    const double w = theta.w(q, l);
    const double lg1 = log_normal_pdf(x, theta.mu(q, l), theta.sigma(q, l));
    const double lg0 = log_normal_pdf(x, 0.0, theta.sigma0);
    const double r = rho_value(x, q, l, theta);
    return r * (lg1 + std::log(w) - 1.0) + (1.0 - r) * (lg0 + std::log1p(-w));
}

EdgeTables compute_edge_tables(const ObservationMatrix& x, const ModelParams& theta) {
    const int Q = theta.Q;
    const std::size_t m = x.m();
    EdgeTables tab;
    tab.Q = Q;
    tab.rho.resize(m * Q * Q);
    tab.d.resize(m * Q * Q);
    for (std::size_t e = 0; e < m; ++e) {
        const double xe = x.values[e];
        const double lg0 = log_normal_pdf(xe, 0.0, theta.sigma0);
        for (int q = 0; q < Q; ++q) {
            for (int l = q; l < Q; ++l) {
                const double w = theta.w(q, l);
                const double lg1 = log_normal_pdf(xe, theta.mu(q, l), theta.sigma(q, l));
                const double s = std::log(w) - std::log1p(-w) + lg1 - lg0;
                double r;
                if (s > 0) {
                    const double ex = std::exp(-s);
                    r = 1.0 / (1.0 + ex);
                } else {
                    const double ex = std::exp(s);
                    r = ex / (1.0 + ex);
                }
                const double d = r * (lg1 + std::log(w) - 1.0) +
                                 (1.0 - r) * (lg0 + std::log1p(-w));
                tab.rho[(e * Q + q) * Q + l] = r;
                tab.rho[(e * Q + l) * Q + q] = r;
                tab.d[(e * Q + q) * Q + l] = d;
                tab.d[(e * Q + l) * Q + q] = d;
            }
        }
    }
    return tab;
}

VariationalParams ve_step(const ObservationMatrix& x, const ModelParams& theta,
                          const VariationalParams& tau_init, const FitConfig& config) {
    const int n = x.n;
    const int Q = theta.Q;
    VariationalParams tau = tau_init;
    if (Q == 1) {
        for (auto& t : tau.tau) t = 1.0;
        return tau;
    }

    const EdgeTables tab = compute_edge_tables(x, theta);
    std::vector<double> logpi(Q);
    for (int q = 0; q < Q; ++q) logpi[q] = std::log(theta.pi[q]);

    const EdgeIndexMap idx(n);
    std::vector<double> score(static_cast<std::size_t>(n) * Q);
    for (int it = 0; it < config.max_fixedpoint_iters; ++it) {
        for (int i = 0; i < n; ++i)
            for (int q = 0; q < Q; ++q) score[static_cast<std::size_t>(i) * Q + q] = logpi[q];
        std::size_t e = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j, ++e) {
                const double* de = &tab.d[e * Q * Q];
                for (int q = 0; q < Q; ++q) {
                    double si = 0.0, sj = 0.0;
                    for (int l = 0; l < Q; ++l) {
                        // d is symmetric in (q,l), so the same row serves both nodes
                        si += tau(j, l) * de[q * Q + l];
                        sj += tau(i, l) * de[q * Q + l];
                    }
                    score[static_cast<std::size_t>(i) * Q + q] += si;
                    score[static_cast<std::size_t>(j) * Q + q] += sj;
                }
            }
        }

        double max_change = 0.0;
        for (int i = 0; i < n; ++i) {
            double* s = &score[static_cast<std::size_t>(i) * Q];
            const double smax = *std::max_element(s, s + Q);
            if (!std::isfinite(smax)) throw FitFailure("ve_step: non-finite score");
            double norm = 0.0;
            for (int q = 0; q < Q; ++q) norm += std::exp(s[q] - smax);
            for (int q = 0; q < Q; ++q) {
                const double fp = std::exp(s[q] - smax) / norm;
                const double next = (1.0 - config.damping) * fp + config.damping * tau(i, q);
                max_change = std::max(max_change, std::abs(next - tau(i, q)));
                tau(i, q) = next;
            }
            normalize_row(&tau.tau[static_cast<std::size_t>(i) * Q], Q);
        }
        if (max_change < 1e-8) break;
    }
    return tau;
}

ModelParams m_step(const ObservationMatrix& x, const VariationalParams& tau,
                   const ModelParams& theta_prev, double sigma2_floor,
                   std::vector<std::pair<int, int>>* degenerate_cells) {
    const int n = x.n;
    const int Q = theta_prev.Q;
    const EdgeTables tab = compute_edge_tables(x, theta_prev);

    ModelParams out;
    out.Q = Q;
    out.pi.assign(Q, 0.0);
    out.w = QTable(Q, 0.0);
    out.mu = QTable(Q, 0.0);
    out.sigma = QTable(Q, 1.0);

    for (int i = 0; i < n; ++i)
        for (int q = 0; q < Q; ++q) out.pi[q] += tau(i, q);
    for (int q = 0; q < Q; ++q) out.pi[q] = std::max(out.pi[q] / n, kTauFloor);
    {
        double sum = 0.0;
        for (double p : out.pi) sum += p;
        for (double& p : out.pi) p /= sum;
    }

    double sbar = 0.0, sbar_x2 = 0.0;
    for (int q = 0; q < Q; ++q) {
        for (int l = q; l < Q; ++l) {
            double sw = 0.0, sk = 0.0, skx = 0.0, skx2 = 0.0;
            std::size_t e = 0;
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j, ++e) {
                    const double weight = (q == l)
                                              ? tau(i, q) * tau(j, q)
                                              : tau(i, q) * tau(j, l) + tau(i, l) * tau(j, q);
                    const double r = tab.get_rho(e, q, l);
                    const double kappa = weight * r;
                    const double xe = x.values[e];
                    sw += weight;
                    sk += kappa;
                    skx += kappa * xe;
                    skx2 += kappa * xe * xe;
                    const double kbar = weight - kappa;
                    sbar += kbar;
                    sbar_x2 += kbar * xe * xe;
                }
            }
            if (sk <= 0.0 || sw <= 0.0) {
                if (degenerate_cells) degenerate_cells->emplace_back(q, l);
                out.w.set(q, l, theta_prev.w(q, l));
                out.mu.set(q, l, theta_prev.mu(q, l));
                out.sigma.set(q, l, theta_prev.sigma(q, l));
                continue;
            }
            const double wql = std::clamp(sk / sw, 1e-8, 1.0 - 1e-8);
            const double muql = skx / sk;
            const double var = std::max(skx2 / sk - muql * muql, sigma2_floor);
            out.w.set(q, l, wql);
            out.mu.set(q, l, muql);
            out.sigma.set(q, l, std::sqrt(var));
        }
    }
    if (sbar <= 0.0) {
        out.sigma0 = theta_prev.sigma0;
        if (degenerate_cells) degenerate_cells->emplace_back(-1, -1);
    } else {
        out.sigma0 = std::sqrt(std::max(sbar_x2 / sbar, sigma2_floor));
    }
    return out;
}

double j_criterion(const ModelParams& theta, const VariationalParams& tau,
                   const ModelParams& theta_prev, const ObservationMatrix& x) {
    const int n = x.n;
    const int Q = theta.Q;
    const EdgeTables prev = compute_edge_tables(x, theta_prev);

    double j = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int q = 0; q < Q; ++q) {
            const double t = tau(i, q);
            if (t > 0.0) j += t * std::log(theta.pi[q] / t);
        }
    }

    std::size_t e = 0;
    for (int i = 0; i < n; ++i) {
        for (int jn = i + 1; jn < n; ++jn, ++e) {
            const double xe = x.values[e];
            const double lg0 = log_normal_pdf(xe, 0.0, theta.sigma0);
            for (int q = 0; q < Q; ++q) {
                for (int l = 0; l < Q; ++l) {
                    const double tt = tau(i, q) * tau(jn, l);
                    if (tt == 0.0) continue;
                    const double r = prev.get_rho(e, q, l);
                    const double w = theta.w(q, l);
                    const double lg1 = log_normal_pdf(xe, theta.mu(q, l), theta.sigma(q, l));
                    j += tt * (r * (lg1 + std::log(w) - 1.0) +
                               (1.0 - r) * (lg0 + std::log1p(-w)));
                }
            }
        }
    }
    return j;
}

namespace {

// k-means with k-means++ seeding on the rows of the symmetrized
// observation matrix (diagonal zero).
std::vector<int> kmeans_rows(const std::vector<std::vector<double>>& rows, int Q, Rng& rng,
                             double* inertia_out) {
    const int n = static_cast<int>(rows.size());
    const int dim = static_cast<int>(rows[0].size());
    auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double dlt = a[k] - b[k];
            s += dlt * dlt;
        }
        return s;
    };

    // k-means++ seeding
    std::vector<std::vector<double>> centers;
    std::uniform_int_distribution<int> first(0, n - 1);
    centers.push_back(rows[first(rng)]);
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < Q) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = dist2(rows[i], centers[0]);
            for (std::size_t c = 1; c < centers.size(); ++c)
                best = std::min(best, dist2(rows[i], centers[c]));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centers.push_back(rows[first(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        int pick = n - 1;
        for (int i = 0; i < n; ++i) {
            r -= d2[i];
            if (r <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(rows[pick]);
    }

    std::vector<int> assign(n, 0);
    for (int it = 0; it < 50; ++it) {
        bool moved = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = dist2(rows[i], centers[0]);
            for (int c = 1; c < Q; ++c) {
                const double dd = dist2(rows[i], centers[c]);
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                moved = true;
            }
        }
        std::vector<int> count(Q, 0);
        for (int i = 0; i < n; ++i) ++count[assign[i]];
        for (int c = 0; c < Q; ++c)
            if (count[c] == 0) return {};  // degenerate clustering
        for (int c = 0; c < Q; ++c) std::fill(centers[c].begin(), centers[c].end(), 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < dim; ++k) centers[assign[i]][k] += rows[i][k];
        for (int c = 0; c < Q; ++c)
            for (int k = 0; k < dim; ++k) centers[c][k] /= count[c];
        if (!moved) break;
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i) inertia += dist2(rows[i], centers[assign[i]]);
    if (inertia_out) *inertia_out = inertia;
    return assign;
}

}  // namespace

VariationalParams init_kmeans(const ObservationMatrix& x, int Q, std::uint64_t seed) {
    const int n = x.n;
    if (Q > n) throw std::invalid_argument("init_kmeans: Q > n");
    VariationalParams tau(n, Q);
    if (Q == 1) {
        for (auto& t : tau.tau) t = 1.0;
        return tau;
    }

    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    const EdgeIndexMap idx(n);
    for (std::size_t k = 0; k < idx.m(); ++k) {
        auto [i, j] = idx.nodes(k);
        rows[i][j] = x.values[k];
        rows[j][i] = x.values[k];
    }

    std::vector<int> assign;
    for (int attempt = 0; attempt < 10 && assign.empty(); ++attempt) {
        Rng rng = make_rng(substream(seed, attempt));
        double best_inertia = std::numeric_limits<double>::infinity();
        for (int restart = 0; restart < 5; ++restart) {
            double inertia = 0.0;
            auto cand = kmeans_rows(rows, Q, rng, &inertia);
            if (!cand.empty() && inertia < best_inertia) {
                best_inertia = inertia;
                assign = std::move(cand);
            }
        }
    }
    if (assign.empty()) throw std::runtime_error("init_kmeans: degenerate clustering");

    const double hi = 1.0 - (Q - 1) * kTauFloor;
    for (int i = 0; i < n; ++i)
        for (int q = 0; q < Q; ++q) tau(i, q) = (assign[i] == q) ? hi : kTauFloor;
    return tau;
}

namespace {

// Pooled two-component Gaussian mixture on the edge values; gives the
// initial per-edge connection posterior used to seed theta.
std::vector<double> pooled_mixture_rho(const std::vector<double>& xs, ModelParams* pooled) {
    const std::size_t m = xs.size();
    double mean = 0.0, var = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(m);
    for (double v : xs) var += (v - mean) * (v - mean);
    var = std::max(var / static_cast<double>(m), 1e-8);

    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double q10 = sorted[static_cast<std::size_t>(0.1 * (m - 1))];
    const double q90 = sorted[static_cast<std::size_t>(0.9 * (m - 1))];

    double w = 0.3;
    double mu1 = (std::abs(q90) >= std::abs(q10)) ? q90 : q10;
    double s0 = std::sqrt(var) * 0.8;
    double s1 = std::sqrt(var);
    if (std::abs(mu1) < 1e-6) mu1 = (mu1 >= 0 ? 1e-3 : -1e-3);

    std::vector<double> r(m, 0.0);
    for (int it = 0; it < 100; ++it) {
        double sr = 0.0, srx = 0.0, srx2 = 0.0, sn = 0.0, snx2 = 0.0;
        for (std::size_t e = 0; e < m; ++e) {
            const double s = std::log(w) - std::log1p(-w) + log_normal_pdf(xs[e], mu1, s1) -
                             log_normal_pdf(xs[e], 0.0, s0);
            const double re = (s > 0) ? 1.0 / (1.0 + std::exp(-s))
                                      : std::exp(s) / (1.0 + std::exp(s));
            r[e] = re;
            sr += re;
            srx += re * xs[e];
            srx2 += re * xs[e] * xs[e];
            sn += 1.0 - re;
            snx2 += (1.0 - re) * xs[e] * xs[e];
        }
        if (sr <= 1e-12 || sn <= 1e-12) break;
        w = std::clamp(sr / static_cast<double>(m), 1e-6, 1.0 - 1e-6);
        mu1 = srx / sr;
        s1 = std::sqrt(std::max(srx2 / sr - mu1 * mu1, 1e-8));
        s0 = std::sqrt(std::max(snx2 / sn, 1e-8));
    }
    if (pooled) {
        pooled->sigma0 = s0;
        pooled->mu = QTable(1, mu1);
        pooled->sigma = QTable(1, s1);
        pooled->w = QTable(1, w);
    }
    return r;
}

// Weighted M-step driven by an externally supplied per-edge rho.
ModelParams m_step_from_rho(const ObservationMatrix& x, const VariationalParams& tau,
                            const std::vector<double>& rho, const ModelParams& fallback,
                            double sigma2_floor) {
    const int n = x.n;
    const int Q = tau.Q;
    ModelParams out;
    out.Q = Q;
    out.pi.assign(Q, 0.0);
    out.w = QTable(Q, 0.0);
    out.mu = QTable(Q, 0.0);
    out.sigma = QTable(Q, 1.0);

    for (int i = 0; i < n; ++i)
        for (int q = 0; q < Q; ++q) out.pi[q] += tau(i, q);
    for (int q = 0; q < Q; ++q) out.pi[q] = std::max(out.pi[q] / n, kTauFloor);
    {
        double sum = 0.0;
        for (double p : out.pi) sum += p;
        for (double& p : out.pi) p /= sum;
    }

    double sbar = 0.0, sbar_x2 = 0.0;
    for (std::size_t e = 0; e < x.m(); ++e) {
        sbar += 1.0 - rho[e];
        sbar_x2 += (1.0 - rho[e]) * x.values[e] * x.values[e];
    }
    out.sigma0 = (sbar > 0.0) ? std::sqrt(std::max(sbar_x2 / sbar, sigma2_floor))
                              : fallback.sigma0;

    for (int q = 0; q < Q; ++q) {
        for (int l = q; l < Q; ++l) {
            double sw = 0.0, sk = 0.0, skx = 0.0, skx2 = 0.0;
            std::size_t e = 0;
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j, ++e) {
                    const double weight = (q == l)
                                              ? tau(i, q) * tau(j, q)
                                              : tau(i, q) * tau(j, l) + tau(i, l) * tau(j, q);
                    const double kappa = weight * rho[e];
                    const double xe = x.values[e];
                    sw += weight;
                    sk += kappa;
                    skx += kappa * xe;
                    skx2 += kappa * xe * xe;
                }
            }
            if (sk <= 0.0 || sw <= 0.0) {
                out.w.set(q, l, fallback.w(0, 0));
                out.mu.set(q, l, fallback.mu(0, 0));
                out.sigma.set(q, l, fallback.sigma(0, 0));
                continue;
            }
            out.w.set(q, l, std::clamp(sk / sw, 1e-8, 1.0 - 1e-8));
            const double muql = skx / sk;
            out.mu.set(q, l, muql);
            out.sigma.set(q, l, std::sqrt(std::max(skx2 / sk - muql * muql, sigma2_floor)));
        }
    }
    return out;
}

FitResult fit_once(const ObservationMatrix& x, int Q, const FitConfig& config,
                   std::uint64_t seed) {
    VariationalParams tau = init_kmeans(x, Q, seed);
    ModelParams pooled;
    pooled.Q = 1;
    pooled.pi = {1.0};
    const std::vector<double> rho0 = pooled_mixture_rho(x.values, &pooled);
    ModelParams theta = m_step_from_rho(x, tau, rho0, pooled, config.sigma2_floor);

    FitResult res;
    res.converged = false;
    double j_prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < config.max_vem_iters; ++it) {
        tau = ve_step(x, theta, tau, config);
        ModelParams theta_new = m_step(x, tau, theta, config.sigma2_floor);
        const double j = j_criterion(theta_new, tau, theta, x);
        if (!std::isfinite(j)) throw FitFailure("fit: non-finite J");
        res.j_trace.push_back(j);
        theta = std::move(theta_new);
        if (it > 0 && std::abs(j - j_prev) < config.rel_tol * std::abs(j)) {
            res.converged = true;
            j_prev = j;
            break;
        }
        j_prev = j;
    }

    res.theta_hat = std::move(theta);
    res.tau = std::move(tau);
    res.z_hat.resize(x.n);
    for (int i = 0; i < x.n; ++i) {
        int best = 0;
        for (int q = 1; q < Q; ++q)
            if (res.tau(i, q) > res.tau(i, best)) best = q;  // ties to lowest label
        res.z_hat[i] = best;
    }
    return res;
}

}  // namespace

FitResult fit(const ObservationMatrix& x, int Q, const FitConfig& config) {
    if (Q < 1 || Q > x.n) throw std::invalid_argument("fit: Q outside [1, n]");
    std::optional<FitResult> best;
    int failures = 0;
    for (int r = 0; r < config.restarts; ++r) {
        try {
            FitResult cand = fit_once(x, Q, config, substream(config.seed, r));
            if (!best || cand.j_trace.back() > best->j_trace.back()) best = std::move(cand);
        } catch (const std::exception&) {
            ++failures;
        }
    }
    if (!best) throw std::runtime_error("fit: all restarts failed numerically");
    best->icl = icl(x, *best, Q);
    return *best;
}

double icl(const ObservationMatrix& x, const FitResult& result, int Q) {
    const int n = x.n;
    const double m = static_cast<double>(x.m());
    const ModelParams& theta = result.theta_hat;
    const EdgeTables tab = compute_edge_tables(x, theta);

    // conditional expected complete log-likelihood under (theta_hat, tau_hat)
    double ecll = 0.0;
    for (int i = 0; i < n; ++i)
        for (int q = 0; q < Q; ++q) ecll += result.tau(i, q) * std::log(theta.pi[q]);
    std::size_t e = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++e) {
            const double xe = x.values[e];
            const double lg0 = log_normal_pdf(xe, 0.0, theta.sigma0);
            for (int q = 0; q < Q; ++q) {
                for (int l = 0; l < Q; ++l) {
                    const double tt = result.tau(i, q) * result.tau(j, l);
                    if (tt == 0.0) continue;
                    const double r = tab.get_rho(e, q, l);
                    const double w = theta.w(q, l);
                    const double lg1 = log_normal_pdf(xe, theta.mu(q, l), theta.sigma(q, l));
                    ecll += tt * (r * (lg1 + std::log(w)) +
                                  (1.0 - r) * (lg0 + std::log1p(-w)));
                }
            }
        }
    }

    const double d0 = 1.0, d1 = 2.0;
    const double pen = -(Q - 1) * std::log(static_cast<double>(n)) -
                       ((1.0 + d1) * Q * (Q + 1) / 2.0 + d0) * std::log(m);
    return ecll + pen;
}

SelectQResult select_q(const ObservationMatrix& x, int q_max, const FitConfig& config) {
    if (q_max < 1) throw std::invalid_argument("select_q: Qmax must be >= 1");
    SelectQResult out;
    out.fits.resize(q_max);
    double best_icl = -std::numeric_limits<double>::infinity();
    for (int Q = 1; Q <= q_max; ++Q) {
        FitConfig cfg = config;
        cfg.seed = substream(config.seed, 1000 + Q);
        try {
            out.fits[Q - 1] = fit(x, Q, cfg);
        } catch (const std::exception&) {
            continue;  // skipped with warning at the CLI layer
        }
        const double v = out.fits[Q - 1]->icl;
        if (out.best_q == 0 || v > best_icl) {  // ties to smallest Q
            best_icl = v;
            out.best_q = Q;
        }
    }
    if (out.best_q == 0) throw std::runtime_error("select_q: all fits failed");
    return out;
}

ModelParams permute_theta(const ModelParams& theta, const std::vector<int>& perm) {
    ModelParams out = theta;
    for (int q = 0; q < theta.Q; ++q) out.pi[q] = theta.pi[perm[q]];
    for (int q = 0; q < theta.Q; ++q) {
        for (int l = q; l < theta.Q; ++l) {
            out.w.set(q, l, theta.w(perm[q], perm[l]));
            out.mu.set(q, l, theta.mu(perm[q], perm[l]));
            out.sigma.set(q, l, theta.sigma(perm[q], perm[l]));
        }
    }
    return out;
}

}  // namespace nsbm
