#include "nsbm/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "nsbm/rng.hpp"

namespace nsbm {

std::string to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::nsbm: return "nsbm";
        case GraphKind::star: return "star";
        case GraphKind::spider: return "spider";
        case GraphKind::erdos_renyi_M: return "erdos_renyi";
        case GraphKind::bipartite: return "bipartite";
        case GraphKind::preferential_attachment: return "preferential";
    }
    return "?";
}

GraphKind graph_kind_from_string(const std::string& s) {
    if (s == "nsbm") return GraphKind::nsbm;
    if (s == "star") return GraphKind::star;
    if (s == "spider") return GraphKind::spider;
    if (s == "erdos_renyi") return GraphKind::erdos_renyi_M;
    if (s == "bipartite") return GraphKind::bipartite;
    if (s == "preferential") return GraphKind::preferential_attachment;
    throw std::invalid_argument("unknown graph kind: " + s);
}

std::pair<LatentState, ObservationMatrix> sample_nsbm(int n, const ModelParams& theta,
                                                      std::uint64_t seed) {
    validate_theta(theta);
    Rng rng = make_rng(seed);
    LatentState state;
    state.z.resize(n);
    std::discrete_distribution<int> group(theta.pi.begin(), theta.pi.end());
    for (int i = 0; i < n; ++i) state.z[i] = group(rng);

    state.a = Adjacency(n);
    ObservationMatrix x(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);
    const EdgeIndexMap idx(n);
    for (std::size_t k = 0; k < idx.m(); ++k) {
        auto [i, j] = idx.nodes(k);
        const int q = state.z[i], l = state.z[j];
        const bool edge = unif(rng) < theta.w(q, l);
        state.a.edges[k] = edge ? 1 : 0;
        if (edge)
            x.values[k] = theta.mu(q, l) + theta.sigma(q, l) * norm(rng);
        else
            x.values[k] = theta.sigma0 * norm(rng);
    }
    return {std::move(state), std::move(x)};
}

Adjacency graph_star(int n) {
    if (n < 3) throw std::invalid_argument("star: n must be >= 3");
    Adjacency a(n);
    const EdgeIndexMap idx(n);
    for (int j = 1; j < n; ++j) a.edges[idx.index(0, j)] = 1;
    return a;
}

Adjacency graph_spider(int n) {
    // hub plus a ring over the non-hub nodes
    Adjacency a = graph_star(n);
    const EdgeIndexMap idx(n);
    for (int j = 1; j < n; ++j) {
        const int next = (j == n - 1) ? 1 : j + 1;
        a.edges[idx.index(j, next)] = 1;
    }
    return a;
}

Adjacency graph_erdos_renyi(int n, std::size_t M, std::uint64_t seed) {
    Adjacency a(n);
    const std::size_t m = a.m();
    if (M > m) throw std::invalid_argument("erdos_renyi: M exceeds edge count");
    // partial Fisher-Yates over edge indices
    std::vector<std::size_t> pool(m);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Rng rng = make_rng(seed);
    for (std::size_t k = 0; k < M; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, m - 1);
        std::swap(pool[k], pool[pick(rng)]);
        a.edges[pool[k]] = 1;
    }
    return a;
}

Adjacency graph_bipartite(int n, double p, std::uint64_t seed) {
    if (n % 2 != 0) throw std::invalid_argument("bipartite: n must be even");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("bipartite: p outside [0,1]");
    Adjacency a(n);
    const EdgeIndexMap idx(n);
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int half = n / 2;
    for (int i = 0; i < half; ++i)
        for (int j = half; j < n; ++j)
            if (unif(rng) < p) a.edges[idx.index(i, j)] = 1;
    return a;
}

Adjacency graph_preferential(int n, int edges_per_node, int n0, double p0,
                             std::uint64_t seed) {
    if (n0 >= n) throw std::invalid_argument("preferential: n0 must be < n");
    if (edges_per_node > n0)
        throw std::invalid_argument("preferential: edges_per_node exceeds root size");
    Adjacency a(n);
    const EdgeIndexMap idx(n);
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<std::size_t> degree(n, 0);
    for (int i = 0; i < n0; ++i) {
        for (int j = i + 1; j < n0; ++j) {
            if (unif(rng) < p0) {
                a.edges[idx.index(i, j)] = 1;
                ++degree[i];
                ++degree[j];
            }
        }
    }
    // degree+1 weights so isolated root nodes stay reachable
    for (int v = n0; v < n; ++v) {
        std::vector<int> targets;
        std::vector<double> weight(v);
        for (int u = 0; u < v; ++u) weight[u] = static_cast<double>(degree[u]) + 1.0;
        for (int e = 0; e < edges_per_node; ++e) {
            std::discrete_distribution<int> pick(weight.begin(), weight.end());
            const int u = pick(rng);
            targets.push_back(u);
            weight[u] = 0.0;  // distinct targets
        }
        for (int u : targets) {
            a.edges[idx.index(u, v)] = 1;
            ++degree[u];
            ++degree[v];
        }
    }
    return a;
}

Adjacency sample_graph(const GraphSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case GraphKind::star: return graph_star(spec.n);
        case GraphKind::spider: return graph_spider(spec.n);
        case GraphKind::erdos_renyi_M: return graph_erdos_renyi(spec.n, spec.M, seed);
        case GraphKind::bipartite: return graph_bipartite(spec.n, spec.p, seed);
        case GraphKind::preferential_attachment:
            return graph_preferential(spec.n, spec.edges_per_node, spec.n0, spec.p0, seed);
        case GraphKind::nsbm:
            throw std::invalid_argument("sample_graph: nsbm kind needs sample_nsbm");
    }
    throw std::invalid_argument("sample_graph: bad kind");
}

ObservationMatrix noisy_observation(const Adjacency& a, const NoiseSpec& noise,
                                    std::uint64_t seed) {
    if (!(noise.sigma0 > 0.0 && noise.sigma1 > 0.0))
        throw std::invalid_argument("noisy_observation: sigma must be > 0");
    ObservationMatrix x(a.n);
    Rng rng = make_rng(seed);
    std::normal_distribution<double> norm(0.0, 1.0);
    for (std::size_t k = 0; k < a.m(); ++k) {
        if (a.edges[k])
            x.values[k] = noise.mu1 + noise.sigma1 * norm(rng);
        else
            x.values[k] = noise.sigma0 * norm(rng);
    }
    return x;
}

}  // namespace nsbm
