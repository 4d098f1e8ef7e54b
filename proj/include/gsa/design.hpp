#pragma once

// Aligned transceiver construction. For each active source pair
// the relay projection A cancels external interference (null space of the
// other sources' uplink channels), the source precoders V cancel internal
// interference (inverting the projected channel), and the broadcast
// precoder U nulls each pair's subspace at every non-member receiver.
// The defining identity A H V = P, with P the 0/1 pairing matrix, is what
// the whole design is verified against.

#include <string>
#include <utility>
#include <vector>

#include "gsa/errors.hpp"
#include "gsa/matrix.hpp"
#include "gsa/scenario.hpp"

namespace gsa {

struct PairSpec {
    int s = 0;  // 0-based internal node indices, s < t
    int t = 0;
    int d = 0;  // streams exchanged in each direction
};

// Ordered layout of the network-coded vector and of the stacked symbol
// vector: pairs lexicographic, symbol columns node-major (destinations
// ascending within a node, stream index ascending within a destination).
struct PairPlan {
    std::vector<PairSpec> pairs;
    std::vector<int> row_offsets;         // first relay-stream row of each pair
    int total_relay_streams = 0;
    std::vector<int> node_stream_counts;  // d_i = row sum of node i
    std::vector<int> col_offsets;         // first symbol column of each node

    int num_nodes() const { return static_cast<int>(node_stream_counts.size()); }
    int total_symbols() const {
        int s = 0;
        for (int d : node_stream_counts) s += d;
        return s;
    }
    // symbol column of stream l from node i to node j
    int col_of(int i, int j, int l) const {
        int off = col_offsets[i];
        for (int jj = 0; jj < j; ++jj) {
            if (jj == i) continue;
            // find d_{i,jj} from the pair list
            for (const auto& p : pairs) {
                if ((p.s == i && p.t == jj) || (p.s == jj && p.t == i)) {
                    off += p.d;
                    break;
                }
            }
        }
        return off + l;
    }
    // pair indices involving node i, ascending
    std::vector<int> pairs_of(int i) const {
        std::vector<int> out;
        for (int p = 0; p < static_cast<int>(pairs.size()); ++p)
            if (pairs[p].s == i || pairs[p].t == i) out.push_back(p);
        return out;
    }
};

inline PairPlan build_pair_plan(const DataSwitchMatrix& D) {
    const int K = D.size();
    for (int i = 0; i < K; ++i) {
        if (D(i, i) != 0)
            throw InvalidInputError("pair plan: nonzero diagonal");
        for (int j = i + 1; j < K; ++j) {
            if (D(i, j) != D(j, i))
                throw InvalidInputError("pair plan: asymmetric switch matrix");
            if (D(i, j) < 0)
                throw InvalidInputError("pair plan: negative entry");
        }
    }
    PairPlan plan;
    plan.node_stream_counts.assign(K, 0);
    for (int s = 0; s < K; ++s) {
        plan.node_stream_counts[s] = D.row_sum(s);
        for (int t = s + 1; t < K; ++t)
            if (D(s, t) > 0) {
                plan.row_offsets.push_back(plan.total_relay_streams);
                plan.pairs.push_back({s, t, D(s, t)});
                plan.total_relay_streams += D(s, t);
            }
    }
    plan.col_offsets.assign(K, 0);
    for (int i = 1; i < K; ++i)
        plan.col_offsets[i] = plan.col_offsets[i - 1] + plan.node_stream_counts[i - 1];
    return plan;
}

// The 0/1 pairing matrix: row (pair p, stream l) has unit entries at the
// two symbol columns s_{s,t}^l and s_{t,s}^l.
inline CMatrix pairing_matrix(const PairPlan& plan) {
    CMatrix P = CMatrix::Zero(plan.total_relay_streams, plan.total_symbols());
    for (size_t p = 0; p < plan.pairs.size(); ++p) {
        const auto& pr = plan.pairs[p];
        for (int l = 0; l < pr.d; ++l) {
            const int row = plan.row_offsets[p] + l;
            P(row, plan.col_of(pr.s, pr.t, l)) = 1.0;
            P(row, plan.col_of(pr.t, pr.s, l)) = 1.0;
        }
    }
    return P;
}

namespace detail {

inline int sum_int(const std::vector<int>& v) {
    int s = 0;
    for (int x : v) s += x;
    return s;
}

// Horizontal concatenation of the uplink channels of every node outside
// the pair, N x (sum M - M_s - M_t).
inline CMatrix excluded_uplink_stack(const ChannelSet& cs, int s, int t) {
    const int K = static_cast<int>(cs.H.size());
    Index cols = 0;
    for (int m = 0; m < K; ++m)
        if (m != s && m != t) cols += cs.H[m].cols();
    const Index n = cs.H[s].rows();
    CMatrix stack(n, cols);
    Index at = 0;
    for (int m = 0; m < K; ++m) {
        if (m == s || m == t) continue;
        stack.middleCols(at, cs.H[m].cols()) = cs.H[m];
        at += cs.H[m].cols();
    }
    return stack;
}

// Vertical stack of the downlink channels of every node outside the pair.
inline CMatrix excluded_downlink_stack(const ChannelSet& cs, int s, int t) {
    const int K = static_cast<int>(cs.G.size());
    Index rows = 0;
    for (int m = 0; m < K; ++m)
        if (m != s && m != t) rows += cs.G[m].rows();
    const Index n = cs.G[s].cols();
    CMatrix stack(rows, n);
    Index at = 0;
    for (int m = 0; m < K; ++m) {
        if (m == s || m == t) continue;
        stack.middleRows(at, cs.G[m].rows()) = cs.G[m];
        at += cs.G[m].rows();
    }
    return stack;
}

inline void check_pair_dimension(const PairSpec& pr, Index n, Index excluded,
                                 const char* which) {
    const Index avail = n - excluded;
    if (avail < pr.d)
        throw InfeasibleAntennasError(
            std::string(which) + " for pair (" + std::to_string(pr.s + 1) + "," +
                std::to_string(pr.t + 1) + "): null space has at most " +
                std::to_string(std::max<Index>(avail, 0)) + " dimensions, need " +
                std::to_string(pr.d),
            pr.s + 1, pr.t + 1);
}

} // namespace detail

// Relay projection matrix, total_relay_streams x N. Rows of each pair
// block are Hermitian transposes of an orthonormal null-space basis of
// the excluded uplink stack, so A_p H_m = 0 for every excluded source m.
// The first d_{s,t} basis columns are taken; rows across pairs are then
// verified jointly independent.
inline CMatrix build_projection(const ChannelSet& cs, const PairPlan& plan,
                                const Tolerance& tol = {}) {
    const Index n = cs.H.empty() ? 0 : cs.H[0].rows();
    CMatrix A(plan.total_relay_streams, n);
    for (size_t p = 0; p < plan.pairs.size(); ++p) {
        const auto& pr = plan.pairs[p];
        const CMatrix stack = detail::excluded_uplink_stack(cs, pr.s, pr.t);
        detail::check_pair_dimension(pr, n, stack.cols(), "projection");
        const CMatrix basis = null_space(stack.adjoint(), tol);
        if (basis.cols() < pr.d)
            throw DegenerateChannelError("projection: null space collapsed for pair (" +
                                         std::to_string(pr.s + 1) + "," +
                                         std::to_string(pr.t + 1) + ")");
        A.middleRows(plan.row_offsets[p], pr.d) = basis.leftCols(pr.d).adjoint();
    }
    if (rank(A, tol) != plan.total_relay_streams)
        throw DegenerateChannelError("projection rows are jointly rank deficient");
    return A;
}

// Broadcast precoder, N x total_relay_streams. Column block of each pair
// lies in the null space of the excluded downlink stack, so G_m U_p = 0
// for every excluded receiver m.
inline CMatrix build_broadcast(const ChannelSet& cs, const PairPlan& plan,
                               const Tolerance& tol = {}) {
    const Index n = cs.G.empty() ? 0 : cs.G[0].cols();
    CMatrix U(n, plan.total_relay_streams);
    for (size_t p = 0; p < plan.pairs.size(); ++p) {
        const auto& pr = plan.pairs[p];
        const CMatrix stack = detail::excluded_downlink_stack(cs, pr.s, pr.t);
        detail::check_pair_dimension(pr, n, stack.rows(), "broadcast");
        const CMatrix basis = null_space(stack, tol);
        if (basis.cols() < pr.d)
            throw DegenerateChannelError("broadcast: null space collapsed for pair (" +
                                         std::to_string(pr.s + 1) + "," +
                                         std::to_string(pr.t + 1) + ")");
        U.middleCols(plan.row_offsets[p], pr.d) = basis.leftCols(pr.d);
    }
    if (rank(U, tol) != plan.total_relay_streams)
        throw DegenerateChannelError("broadcast columns are jointly rank deficient");
    return U;
}

// Source precoders V_i. With C = A [H_1 ... H_K], the rows of C hitting
// node i's columns that belong to node i's pairs form the square matrix
// C_i; V_i = C_i^{-1} with columns permuted so that stream (i -> j, l)
// lands exactly on relay row (pair (i,j), stream l). Requires row sums of
// D equal to the effective antenna counts (square C_i).
inline std::vector<CMatrix> build_source_precoders(const ChannelSet& cs,
                                                   const PairPlan& plan,
                                                   const CMatrix& A,
                                                   const Tolerance& tol = {}) {
    const int K = plan.num_nodes();
    std::vector<CMatrix> V(K);
    for (int i = 0; i < K; ++i) {
        const Index mi = cs.H[i].cols();
        if (plan.node_stream_counts[i] != mi)
            throw InvalidInputError("precoders: node " + std::to_string(i + 1) +
                                    " has " + std::to_string(plan.node_stream_counts[i]) +
                                    " streams but " + std::to_string(mi) + " antennas");
        const CMatrix Ci_full = A * cs.H[i];  // total_relay_streams x M_i

        const auto my_pairs = plan.pairs_of(i);
        CMatrix Ci(mi, mi);
        CMatrix Ti = CMatrix::Zero(mi, mi);
        Index row = 0;
        for (int p : my_pairs) {
            const auto& pr = plan.pairs[p];
            const int j = pr.s == i ? pr.t : pr.s;
            for (int l = 0; l < pr.d; ++l, ++row) {
                Ci.row(row) = Ci_full.row(plan.row_offsets[p] + l);
                Ti(row, plan.col_of(i, j, l) - plan.col_offsets[i]) = 1.0;
            }
        }
        try {
            V[i] = invert(Ci, tol) * Ti;
        } catch (const SingularMatrixError&) {
            throw DegenerateChannelError("precoders: projected channel C_" +
                                         std::to_string(i + 1) + " is singular");
        }
    }
    return V;
}

// Zero-forcing receive decoders E_i^{-1}, with E_i the concatenation of
// G_i U_p over node i's pairs. Applying the decoder to a noiseless y_i
// returns the network-coded sums in pair order.
inline std::vector<CMatrix> build_rx_decoders(const ChannelSet& cs,
                                              const PairPlan& plan,
                                              const CMatrix& U,
                                              const Tolerance& tol = {}) {
    const int K = plan.num_nodes();
    std::vector<CMatrix> rx(K);
    for (int i = 0; i < K; ++i) {
        const Index mi = cs.G[i].rows();
        const auto my_pairs = plan.pairs_of(i);
        CMatrix Ei(mi, mi);
        Index col = 0;
        for (int p : my_pairs) {
            const auto& pr = plan.pairs[p];
            Ei.middleCols(col, pr.d) = cs.G[i] * U.middleCols(plan.row_offsets[p], pr.d);
            col += pr.d;
        }
        if (col != mi)
            throw InvalidInputError("decoders: node " + std::to_string(i + 1) +
                                    " stream count mismatch");
        try {
            rx[i] = invert(Ei, tol);
        } catch (const SingularMatrixError&) {
            throw DegenerateChannelError("decoders: effective channel E_" +
                                         std::to_string(i + 1) + " is singular");
        }
    }
    return rx;
}

struct GsaDesign {
    PairPlan plan;
    CMatrix A;                    // total_relay_streams x N
    std::vector<CMatrix> V;       // per node, M_i x M_i
    CMatrix U;                    // N x total_relay_streams
    CMatrix P;                    // pairing matrix (0/1 entries)
    std::vector<CMatrix> rx;      // per node, M_i x M_i zero-forcing decoders
    double identity_residual = 0; // ||A H V - P||_inf at build time
};

// Full two-step design plus verification of the defining identity.
inline GsaDesign build_design(const EffectiveScenario& es, const ChannelSet& cs,
                              const Tolerance& tol = {}) {
    GsaDesign d;
    d.plan = build_pair_plan(es.base.D);
    if (d.plan.total_relay_streams > es.base.N)
        throw InfeasibleAntennasError(
            "relay streams " + std::to_string(d.plan.total_relay_streams) +
                " exceed relay antennas " + std::to_string(es.base.N),
            d.plan.pairs.empty() ? 0 : d.plan.pairs.front().s + 1,
            d.plan.pairs.empty() ? 0 : d.plan.pairs.front().t + 1);
    d.A = build_projection(cs, d.plan, tol);
    d.V = build_source_precoders(cs, d.plan, d.A, tol);
    d.U = build_broadcast(cs, d.plan, tol);
    d.rx = build_rx_decoders(cs, d.plan, d.U, tol);
    d.P = pairing_matrix(d.plan);

    // A H V with the block-diagonal V assembled implicitly
    CMatrix AHV(d.plan.total_relay_streams, d.plan.total_symbols());
    for (int i = 0; i < d.plan.num_nodes(); ++i)
        AHV.middleCols(d.plan.col_offsets[i], d.V[i].cols()) = d.A * cs.H[i] * d.V[i];
    d.identity_residual = max_abs(AHV - d.P);
    if (!(d.identity_residual <= tol.verify_tol))
        throw DegenerateChannelError("alignment identity residual " +
                                     std::to_string(d.identity_residual) +
                                     " exceeds verify_tol");
    return d;
}

// --- symbol extension ------------------------------------------------------

// Factor-fold symbol extension: every antenna count scales by the factor,
// the switch matrix scales entrywise, and a base channel realization lifts
// to the block-diagonal equivalent channel (the same per-slot matrices
// repeated, no time variation needed).
struct SymbolExtension {
    int factor = 1;
    Scenario extended;

    ChannelSet lift(const ChannelSet& base) const {
        ChannelSet out;
        out.seed = base.seed;
        out.H.reserve(base.H.size());
        out.G.reserve(base.G.size());
        for (const auto& h : base.H) {
            CMatrix hx = CMatrix::Zero(h.rows() * factor, h.cols() * factor);
            for (int f = 0; f < factor; ++f)
                hx.block(f * h.rows(), f * h.cols(), h.rows(), h.cols()) = h;
            out.H.push_back(std::move(hx));
        }
        for (const auto& g : base.G) {
            CMatrix gx = CMatrix::Zero(g.rows() * factor, g.cols() * factor);
            for (int f = 0; f < factor; ++f)
                gx.block(f * g.rows(), f * g.cols(), g.rows(), g.cols()) = g;
            out.G.push_back(std::move(gx));
        }
        return out;
    }
};

inline SymbolExtension extend_symbols(const Scenario& base, int factor) {
    if (factor < 1) throw InvalidInputError("extend_symbols: factor must be >= 1");
    SymbolExtension ext;
    ext.factor = factor;
    std::vector<int> M(base.K);
    for (int i = 0; i < base.K; ++i) M[i] = base.M[i] * factor;
    DataSwitchMatrix D(Eigen::MatrixXi(base.D.d * factor));
    ext.extended = make_scenario(M, base.N * factor, D);
    // base is already sorted; keep its caller labels
    ext.extended.node_labels = base.node_labels;
    return ext;
}

// Y channel with fractional per-pair streams M/(K-1): the factor-extended
// instance has integer entries factor*M/(K-1). This is the entry point the
// indivisible preset points to.
inline SymbolExtension extend_y_channel(int K, int M, int N, int factor) {
    if (K < 3) throw InvalidInputError("extend_y_channel: K must be >= 3");
    if (factor < 1) throw InvalidInputError("extend_y_channel: factor must be >= 1");
    if ((static_cast<long long>(factor) * M) % (K - 1) != 0)
        throw NotRepresentableError("extend_y_channel: factor*M/(K-1) = " +
                                    std::to_string(factor) + "*" + std::to_string(M) +
                                    "/" + std::to_string(K - 1) +
                                    " is still fractional; use a multiple of K-1");
    SymbolExtension ext;
    ext.factor = factor;
    ext.extended = preset_y(K, M * factor, N * factor);
    return ext;
}

} // namespace gsa
