#ifndef NSBM_SAMPLER_HPP
#define NSBM_SAMPLER_HPP

#include <cstdint>
#include <string>
#include <utility>

#include "nsbm/edges.hpp"
#include "nsbm/model.hpp"

namespace nsbm {

enum class GraphKind { nsbm, star, spider, erdos_renyi_M, bipartite, preferential_attachment };

std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& s);

// Ground-truth graph description for scenarios 2-3.
struct GraphSpec {
    GraphKind kind = GraphKind::star;
    int n = 0;
    std::size_t M = 0;          // erdos_renyi_M
    double p = 0.0;             // bipartite
    int edges_per_node = 0;     // preferential_attachment
    int n0 = 0;                 // preferential_attachment root size
    double p0 = 0.0;            // preferential_attachment root probability
};

// Gaussian noise layer on a fixed graph: N(0, sigma0^2) off edges,
// N(mu1, sigma1^2) on edges.
struct NoiseSpec {
    double sigma0 = 1.0;
    double mu1 = 2.0;
    double sigma1 = 1.0;
};

std::pair<LatentState, ObservationMatrix> sample_nsbm(int n, const ModelParams& theta,
                                                      std::uint64_t seed);

Adjacency graph_star(int n);
Adjacency graph_spider(int n);
Adjacency graph_erdos_renyi(int n, std::size_t M, std::uint64_t seed);
Adjacency graph_bipartite(int n, double p, std::uint64_t seed);
Adjacency graph_preferential(int n, int edges_per_node, int n0, double p0, std::uint64_t seed);

Adjacency sample_graph(const GraphSpec& spec, std::uint64_t seed);

ObservationMatrix noisy_observation(const Adjacency& a, const NoiseSpec& noise,
                                    std::uint64_t seed);

}  // namespace nsbm

#endif
