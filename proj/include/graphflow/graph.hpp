#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "graphflow/errors.hpp"
#include "graphflow/rng.hpp"

namespace graphflow {

struct Edge {
    int u;
    int v;
    double w;
};

// Undirected weighted graph. Edges are stored once with u < v and strictly
// positive weight; construction rejects anything that is not a simple
// connected graph on at least two nodes.
class Graph {
public:
    static Graph from_edges(int n, std::vector<Edge> edges) {
        if (n < 2) throw std::invalid_argument("graph needs at least 2 nodes");
        std::set<std::pair<int, int>> seen;
        for (auto& e : edges) {
            if (e.u == e.v) throw std::invalid_argument("self-loop rejected");
            if (e.u > e.v) std::swap(e.u, e.v);
            if (e.u < 0 || e.v >= n)
                throw std::invalid_argument("edge endpoint out of range");
            if (!(e.w > 0.0) || !std::isfinite(e.w))
                throw std::invalid_argument("edge weight must be positive and finite");
            if (!seen.emplace(e.u, e.v).second)
                throw std::invalid_argument("duplicate edge rejected");
        }
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.u, a.v) < std::tie(b.u, b.v);
        });
        Graph g;
        g.n_ = n;
        g.edges_ = std::move(edges);
        g.build();
        if (!g.connected())
            throw std::invalid_argument("graph must be connected");
        return g;
    }

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Eigen::VectorXd& degree() const { return degree_; }
    double max_degree() const { return degree_.maxCoeff(); }

    const std::vector<std::vector<std::pair<int, double>>>& adjacency() const {
        return adj_;
    }

private:
    Graph() = default;

    void build() {
        degree_ = Eigen::VectorXd::Zero(n_);
        adj_.assign(n_, {});
        for (const auto& e : edges_) {
            degree_[e.u] += e.w;
            degree_[e.v] += e.w;
            adj_[e.u].emplace_back(e.v, e.w);
            adj_[e.v].emplace_back(e.u, e.w);
        }
    }

    bool connected() const {
        std::vector<char> vis(n_, 0);
        std::vector<int> stack{0};
        vis[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (const auto& [v, w] : adj_[u]) {
                if (!vis[v]) {
                    vis[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == n_;
    }

    int n_ = 0;
    std::vector<Edge> edges_;
    Eigen::VectorXd degree_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
};

// y = L h with L = D - W, assembled edge by edge.
inline Eigen::VectorXd laplacian_apply(const Graph& g, const Eigen::VectorXd& h) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(g.node_count());
    for (const auto& e : g.edges()) {
        const double d = e.w * (h[e.u] - h[e.v]);
        y[e.u] += d;
        y[e.v] -= d;
    }
    return y;
}

// y_i = sum_j W_ij |h_i - h_j|^{p-2} (h_i - h_j), defined for p >= 2.
inline Eigen::VectorXd p_laplacian_apply(const Graph& g, const Eigen::VectorXd& h,
                                         double p) {
    if (p < 2.0) throw std::invalid_argument("p must be >= 2");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(g.node_count());
    for (const auto& e : g.edges()) {
        const double d = h[e.u] - h[e.v];
        if (d == 0.0) continue;
        const double t = e.w * std::pow(std::abs(d), p - 2.0) * d;
        y[e.u] += t;
        y[e.v] -= t;
    }
    return y;
}

// sum over edges of W_ij |h_i - h_j|^p.
inline double dirichlet_energy_p(const Graph& g, const Eigen::VectorXd& h,
                                 double p) {
    if (p < 2.0) throw std::invalid_argument("p must be >= 2");
    double s = 0.0;
    for (const auto& e : g.edges())
        s += e.w * std::pow(std::abs(h[e.u] - h[e.v]), p);
    return s;
}

inline Eigen::MatrixXd laplacian_matrix(const Graph& g) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(g.node_count(), g.node_count());
    for (const auto& e : g.edges()) {
        L(e.u, e.u) += e.w;
        L(e.v, e.v) += e.w;
        L(e.u, e.v) -= e.w;
        L(e.v, e.u) -= e.w;
    }
    return L;
}

inline Graph path_graph(int n) {
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
    return Graph::from_edges(n, std::move(e));
}

inline Graph cycle_graph(int n) {
    if (n < 3) throw std::invalid_argument("cycle needs at least 3 nodes");
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
    e.push_back({0, n - 1, 1.0});
    return Graph::from_edges(n, std::move(e));
}

inline Graph star_graph(int n) {
    std::vector<Edge> e;
    for (int i = 1; i < n; ++i) e.push_back({0, i, 1.0});
    return Graph::from_edges(n, std::move(e));
}

inline Graph complete_graph(int n, double w = 1.0) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.push_back({i, j, w});
    return Graph::from_edges(n, std::move(e));
}

inline Graph grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1 || rows * cols < 2)
        throw std::invalid_argument("grid needs at least 2 nodes");
    std::vector<Edge> e;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const int u = i * cols + j;
            if (j + 1 < cols) e.push_back({u, u + 1, 1.0});
            if (i + 1 < rows) e.push_back({u, u + cols, 1.0});
        }
    }
    return Graph::from_edges(rows * cols, std::move(e));
}

// G(n, prob) with unit weights. Draws are made in lexicographic pair order so
// the result depends only on the seed. If the sample is disconnected the
// seed is bumped by one and the draw repeats, up to 100 attempts.
inline Graph erdos_renyi_graph(int n, double prob, std::uint64_t seed) {
    if (!(prob > 0.0 && prob <= 1.0))
        throw std::invalid_argument("edge probability must be in (0, 1]");
    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng(seed + static_cast<std::uint64_t>(attempt));
        std::vector<Edge> e;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform() < prob) e.push_back({i, j, 1.0});
        try {
            return Graph::from_edges(n, std::move(e));
        } catch (const std::invalid_argument&) {
            continue;
        }
    }
    throw NumericalError("erdos_renyi_graph: no connected sample in 100 attempts");
}

// Random d-regular graph via the pairing model, rejecting pairings with
// self-loops or parallel edges, then rejecting disconnected samples.
inline Graph random_regular_graph(int n, int d, std::uint64_t seed) {
    if (d < 1 || d >= n || (n * d) % 2 != 0)
        throw std::invalid_argument("invalid regular graph parameters");
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Rng rng(seed + static_cast<std::uint64_t>(attempt));
        std::vector<int> stubs;
        stubs.reserve(n * d);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k) stubs.push_back(i);
        for (int i = static_cast<int>(stubs.size()) - 1; i > 0; --i)
            std::swap(stubs[i], stubs[rng.below(i + 1)]);
        std::set<std::pair<int, int>> seen;
        std::vector<Edge> e;
        bool ok = true;
        for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
            int u = stubs[k], v = stubs[k + 1];
            if (u == v) {
                ok = false;
                break;
            }
            if (u > v) std::swap(u, v);
            if (!seen.emplace(u, v).second) {
                ok = false;
                break;
            }
            e.push_back({u, v, 1.0});
        }
        if (!ok) continue;
        try {
            return Graph::from_edges(n, std::move(e));
        } catch (const std::invalid_argument&) {
            continue;
        }
    }
    throw NumericalError("random_regular_graph: no valid pairing in 1000 attempts");
}

// Zachary's karate club, 34 nodes, 78 unit-weight edges.
inline Graph karate_club_graph() {
    static const int pairs[][2] = {
        {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},
        {0, 8},   {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},
        {0, 21},  {0, 31},  {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},
        {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},   {2, 9},
        {2, 13},  {2, 27},  {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},
        {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},  {6, 16},  {8, 30},
        {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33}, {15, 32},
        {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
        {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25},
        {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31},
        {28, 33}, {29, 32}, {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33},
        {32, 33}};
    std::vector<Edge> e;
    for (const auto& p : pairs) e.push_back({p[0], p[1], 1.0});
    return Graph::from_edges(34, std::move(e));
}

// Text format: first line "N m", then m lines "i j w" with 0-based indices.
inline Graph load_graph(std::istream& in) {
    int n = 0, m = 0;
    if (!(in >> n >> m)) throw IoError("graph header: expected \"N m\"");
    std::vector<Edge> e;
    e.reserve(m);
    for (int k = 0; k < m; ++k) {
        Edge ed;
        if (!(in >> ed.u >> ed.v >> ed.w))
            throw IoError("graph edge line " + std::to_string(k) + ": expected \"i j w\"");
        e.push_back(ed);
    }
    return Graph::from_edges(n, std::move(e));
}

inline Graph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open graph file: " + path);
    return load_graph(in);
}

inline void save_graph(const Graph& g, std::ostream& out) {
    out << g.node_count() << " " << g.edge_count() << "\n";
    std::ostringstream fmt;
    fmt.precision(17);
    for (const auto& e : g.edges()) {
        fmt.str("");
        fmt << e.w;
        out << e.u << " " << e.v << " " << fmt.str() << "\n";
    }
}

inline void save_graph_file(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    save_graph(g, out);
}

}  // namespace graphflow
