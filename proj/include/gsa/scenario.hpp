#pragma once

// Problem instances: antenna configuration, data switch matrix, channel
// realizations. Nodes are stored in non-increasing antenna order; the
// permutation back to the caller's labels is kept so I/O can round-trip.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gsa/errors.hpp"
#include "gsa/matrix.hpp"

namespace gsa {

// K x K nonnegative integer matrix, entry (i,j) = streams from node i to
// node j. Symmetric with zero diagonal under the modelling assumptions.
struct DataSwitchMatrix {
    Eigen::MatrixXi d;

    DataSwitchMatrix() = default;
    explicit DataSwitchMatrix(Eigen::MatrixXi m) : d(std::move(m)) {}
    static DataSwitchMatrix zero(int k) { return DataSwitchMatrix(Eigen::MatrixXi::Zero(k, k)); }

    int size() const { return static_cast<int>(d.rows()); }
    int operator()(int i, int j) const { return d(i, j); }
    int& operator()(int i, int j) { return d(i, j); }

    int row_sum(int i) const { return d.row(i).sum(); }
    int total() const { return d.sum(); }

    bool operator==(const DataSwitchMatrix& o) const { return d == o.d; }
};

struct Scenario {
    int K = 0;
    std::vector<int> M;   // non-increasing
    int N = 0;
    DataSwitchMatrix D;   // indexed like M
    // node_labels[i] = caller's 1-based label of internal node i
    std::vector<int> node_labels;

    // internal index of a caller label
    int index_of_label(int label) const {
        for (int i = 0; i < K; ++i)
            if (node_labels[i] == label) return i;
        throw InvalidInputError("unknown node label " + std::to_string(label));
    }
};

struct EffectiveScenario {
    Scenario base;
    std::vector<int> M_eff;  // M with node 1 truncated to min(M_1, sum others)
    int deactivated = 0;

    int sum_M_eff() const { return std::accumulate(M_eff.begin(), M_eff.end(), 0); }
};

struct ChannelSet {
    std::vector<CMatrix> H;  // uplink, H[i] is N x M_eff_i
    std::vector<CMatrix> G;  // downlink, G[i] is M_eff_i x N
    std::uint64_t seed = 0;
};

struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
};

// Canonical constructor: checks basic invariants, re-sorts nodes into
// non-increasing antenna order (stable, so equal-antenna configurations
// keep caller order) and permutes D to match.
inline Scenario make_scenario(std::vector<int> M, int N, DataSwitchMatrix D) {
    const int K = static_cast<int>(M.size());
    if (K < 2) throw InvalidInputError("scenario: K must be >= 2");
    for (int m : M)
        if (m < 1) throw InvalidInputError("scenario: all M_i must be >= 1");
    if (N < 1) throw InvalidInputError("scenario: N must be >= 1");
    if (D.size() != K)
        throw InvalidInputError("scenario: D must be K x K");

    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return M[a] > M[b]; });

    Scenario sc;
    sc.K = K;
    sc.N = N;
    sc.M.resize(K);
    sc.node_labels.resize(K);
    Eigen::MatrixXi ds(K, K);
    for (int i = 0; i < K; ++i) {
        sc.M[i] = M[order[i]];
        sc.node_labels[i] = order[i] + 1;
        for (int j = 0; j < K; ++j) ds(i, j) = D.d(order[i], order[j]);
    }
    sc.D = DataSwitchMatrix(std::move(ds));
    return sc;
}

inline Scenario make_scenario(std::vector<int> M, int N) {
    const int K = static_cast<int>(M.size());
    return make_scenario(std::move(M), N, DataSwitchMatrix::zero(K));
}

// Antenna deactivation: node 1 uses only min(M_1, sum of the others)
// antennas, everything else unchanged. Idempotent.
inline EffectiveScenario effective_antennas(const Scenario& sc) {
    EffectiveScenario es;
    es.base = sc;
    es.M_eff = sc.M;
    const int sum_others = std::accumulate(sc.M.begin() + 1, sc.M.end(), 0);
    es.M_eff[0] = std::min(sc.M[0], sum_others);
    es.deactivated = sc.M[0] - es.M_eff[0];
    return es;
}

// Reports every violated switch-matrix invariant; empty report = valid.
// Row sums are checked against the effective antenna vector when asked.
inline ValidationReport validate_switch_matrix(const DataSwitchMatrix& D,
                                               const Scenario& sc,
                                               bool enforce_row_sums) {
    if (D.size() != sc.K)
        throw InvalidInputError("validate_switch_matrix: D dimension mismatch");
    ValidationReport rep;
    for (int i = 0; i < sc.K; ++i) {
        if (D(i, i) != 0)
            rep.issues.push_back("nonzero diagonal at node " + std::to_string(i + 1));
        for (int j = 0; j < sc.K; ++j) {
            if (D(i, j) < 0)
                rep.issues.push_back("negative entry d[" + std::to_string(i + 1) + "][" +
                                     std::to_string(j + 1) + "]");
            if (j > i && D(i, j) != D(j, i))
                rep.issues.push_back("asymmetric pair (" + std::to_string(i + 1) + "," +
                                     std::to_string(j + 1) + ")");
        }
    }
    if (enforce_row_sums) {
        const EffectiveScenario es = effective_antennas(sc);
        for (int i = 0; i < sc.K; ++i) {
            if (D.row_sum(i) != es.M_eff[i])
                rep.issues.push_back("row sum of node " + std::to_string(i + 1) + " is " +
                                     std::to_string(D.row_sum(i)) + ", expected " +
                                     std::to_string(es.M_eff[i]));
        }
    }
    return rep;
}

// --- presets -------------------------------------------------------------

// K-user Y channel: every pair exchanges M/(K-1) streams.
inline Scenario preset_y(int K, int M, int N) {
    if (K < 3) throw InvalidInputError("y preset: K must be >= 3");
    if (M % (K - 1) != 0)
        throw NotRepresentableError(
            "y preset: M/(K-1) = " + std::to_string(M) + "/" + std::to_string(K - 1) +
            " is fractional; use symbol extension (factor K-1)");
    const int d = M / (K - 1);
    DataSwitchMatrix D = DataSwitchMatrix::zero(K);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            if (i != j) D(i, j) = d;
    return make_scenario(std::vector<int>(K, M), N, std::move(D));
}

// Star traffic: node 1 exchanges M_j streams with every node j >= 2, no
// traffic among the leaves. The unique pattern for the M_1 >= sum others
// regime.
inline Scenario preset_star(const std::vector<int>& M, int N) {
    const int K = static_cast<int>(M.size());
    if (K < 2) throw InvalidInputError("star preset: K must be >= 2");
    DataSwitchMatrix D = DataSwitchMatrix::zero(K);
    for (int j = 1; j < K; ++j) {
        D(0, j) = M[j];
        D(j, 0) = M[j];
    }
    return make_scenario(M, N, std::move(D));
}

// Two-way X relay: two groups of K/2 users, each user exchanges
// M/(K/2) streams with every user of the other group.
inline Scenario preset_xrelay(int K, int M, int N) {
    if (K < 4 || K % 2 != 0)
        throw InvalidInputError("xrelay preset: K must be even and >= 4");
    const int half = K / 2;
    if (M % half != 0)
        throw NotRepresentableError("xrelay preset: M/(K/2) is fractional");
    const int d = M / half;
    DataSwitchMatrix D = DataSwitchMatrix::zero(K);
    for (int i = 0; i < half; ++i)
        for (int j = half; j < K; ++j) {
            D(i, j) = d;
            D(j, i) = d;
        }
    return make_scenario(std::vector<int>(K, M), N, std::move(D));
}

// Multi-pair two-way relay: a perfect matching; each matched pair
// exchanges min(M_s, M_t) streams. Pairs use 1-based labels.
inline Scenario preset_multipair(const std::vector<int>& M,
                                 const std::vector<std::pair<int, int>>& pairs,
                                 int N) {
    const int K = static_cast<int>(M.size());
    std::vector<bool> used(K, false);
    DataSwitchMatrix D = DataSwitchMatrix::zero(K);
    for (auto [a, b] : pairs) {
        if (a < 1 || a > K || b < 1 || b > K || a == b)
            throw InvalidInputError("multipair preset: bad pair");
        if (used[a - 1] || used[b - 1])
            throw InvalidInputError("multipair preset: node matched twice");
        used[a - 1] = used[b - 1] = true;
        const int d = std::min(M[a - 1], M[b - 1]);
        D(a - 1, b - 1) = d;
        D(b - 1, a - 1) = d;
    }
    for (int i = 0; i < K; ++i)
        if (!used[i]) throw InvalidInputError("multipair preset: node " +
                                              std::to_string(i + 1) + " unmatched");
    return make_scenario(M, N, std::move(D));
}

// L-cluster multi-way relay: full exchange within each cluster,
// M/(cluster size - 1) streams per pair. Clusters use 1-based labels.
inline Scenario preset_cluster(const std::vector<int>& M,
                               const std::vector<std::vector<int>>& clusters,
                               int N) {
    const int K = static_cast<int>(M.size());
    std::vector<bool> used(K, false);
    DataSwitchMatrix D = DataSwitchMatrix::zero(K);
    for (const auto& cl : clusters) {
        if (cl.size() < 2) throw InvalidInputError("cluster preset: cluster too small");
        for (int a : cl) {
            if (a < 1 || a > K) throw InvalidInputError("cluster preset: bad label");
            if (used[a - 1]) throw InvalidInputError("cluster preset: node in two clusters");
            used[a - 1] = true;
        }
        const int c = static_cast<int>(cl.size());
        for (int a : cl) {
            if (M[a - 1] % (c - 1) != 0)
                throw NotRepresentableError("cluster preset: M/(cluster-1) fractional");
            for (int b : cl)
                if (a != b) D(a - 1, b - 1) = M[a - 1] / (c - 1);
        }
    }
    for (int i = 0; i < K; ++i)
        if (!used[i]) throw InvalidInputError("cluster preset: node " +
                                              std::to_string(i + 1) + " unclustered");
    return make_scenario(M, N, std::move(D));
}

// --- channels ------------------------------------------------------------

// Full-rank check shared by sampled and injected channel sets.
inline void check_channels(const EffectiveScenario& es, const ChannelSet& cs) {
    const int K = es.base.K;
    if (static_cast<int>(cs.H.size()) != K || static_cast<int>(cs.G.size()) != K)
        throw InvalidInputError("channel set: wrong node count");
    for (int i = 0; i < K; ++i) {
        const Index n = es.base.N, m = es.M_eff[i];
        if (cs.H[i].rows() != n || cs.H[i].cols() != m)
            throw InvalidInputError("channel set: H dimension mismatch at node " +
                                    std::to_string(i + 1));
        if (cs.G[i].rows() != m || cs.G[i].cols() != n)
            throw InvalidInputError("channel set: G dimension mismatch at node " +
                                    std::to_string(i + 1));
        if (!is_finite(cs.H[i]) || !is_finite(cs.G[i]))
            throw InvalidInputError("channel set: non-finite entries at node " +
                                    std::to_string(i + 1));
        const Index full = std::min(n, m);
        if (rank(cs.H[i]) != full || rank(cs.G[i]) != full)
            throw DegenerateChannelError("rank-deficient channel at node " +
                                         std::to_string(i + 1));
    }
}

// Draws the uplink/downlink realizations. Node 1 is sampled at its full
// antenna count and truncated to the first M_eff_1 columns/rows, which is
// how antenna deactivation is realized. Substream seeds: uplink of node i
// uses mix_seed(seed, 2i), downlink mix_seed(seed, 2i+1) (i 0-based).
inline ChannelSet sample_channels(const EffectiveScenario& es, std::uint64_t seed) {
    ChannelSet cs;
    cs.seed = seed;
    const int K = es.base.K;
    const Index n = es.base.N;
    cs.H.reserve(K);
    cs.G.reserve(K);
    for (int i = 0; i < K; ++i) {
        const Index m_full = es.base.M[i];
        const Index m_eff = es.M_eff[i];
        CMatrix h = sample_gaussian(n, m_full, mix_seed(seed, 2 * static_cast<std::uint64_t>(i)));
        CMatrix g = sample_gaussian(m_full, n, mix_seed(seed, 2 * static_cast<std::uint64_t>(i) + 1));
        cs.H.push_back(h.leftCols(m_eff));
        cs.G.push_back(g.topRows(m_eff));
    }
    check_channels(es, cs);
    return cs;
}

} // namespace gsa
