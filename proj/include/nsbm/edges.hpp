#ifndef NSBM_EDGES_HPP
#define NSBM_EDGES_HPP

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nsbm {

// Bijection between unordered node pairs (i,j), 0 <= i < j < n, and the
// flat edge index range {0..m-1}, in lexicographic order.
class EdgeIndexMap {
public:
    explicit EdgeIndexMap(int n) : n_(n) {
        if (n < 2) throw std::invalid_argument("EdgeIndexMap: n must be >= 2");
        m_ = static_cast<std::size_t>(n) * (n - 1) / 2;
    }

    int n() const { return n_; }
    std::size_t m() const { return m_; }

    std::size_t index(int i, int j) const {
        if (i > j) std::swap(i, j);
        if (i < 0 || j >= n_ || i == j)
            throw std::out_of_range("EdgeIndexMap: bad node pair");
        return static_cast<std::size_t>(i) * n_ - static_cast<std::size_t>(i) * (i + 1) / 2
               + (j - i - 1);
    }

    std::pair<int, int> nodes(std::size_t k) const {
        if (k >= m_) throw std::out_of_range("EdgeIndexMap: bad edge index");
        // row i holds n-1-i edges, starting at offset i*n - i(i+1)/2
        int i = 0;
        std::size_t off = 0;
        while (off + static_cast<std::size_t>(n_ - 1 - i) <= k) {
            off += n_ - 1 - i;
            ++i;
        }
        int j = i + 1 + static_cast<int>(k - off);
        return {i, j};
    }

private:
    int n_;
    std::size_t m_;
};

// Symmetric pairwise observations, stored once per unordered pair.
struct ObservationMatrix {
    int n = 0;
    std::vector<double> values;  // length n(n-1)/2, edge-index order

    ObservationMatrix() = default;
    explicit ObservationMatrix(int n_) : n(n_), values(EdgeIndexMap(n_).m(), 0.0) {}

    double operator()(int i, int j) const { return values[EdgeIndexMap(n).index(i, j)]; }
    std::size_t m() const { return values.size(); }
};

// Binary adjacency on edges, no self loops.
struct Adjacency {
    int n = 0;
    std::vector<std::uint8_t> edges;  // length n(n-1)/2

    Adjacency() = default;
    explicit Adjacency(int n_) : n(n_), edges(EdgeIndexMap(n_).m(), 0) {}

    bool operator()(int i, int j) const { return edges[EdgeIndexMap(n).index(i, j)] != 0; }
    std::size_t m() const { return edges.size(); }
    std::size_t edge_count() const {
        std::size_t c = 0;
        for (auto e : edges) c += e;
        return c;
    }
};

// Ground truth of a simulated NSBM draw. Labels are 0-based internally.
struct LatentState {
    std::vector<int> z;  // length n, values in {0..Q-1}
    Adjacency a;
};

}  // namespace nsbm

#endif
