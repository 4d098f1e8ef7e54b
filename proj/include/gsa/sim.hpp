#pragma once

// End-to-end transmission over the relay: exact noiseless verification and
// noisy Monte Carlo with a sum-rate slope estimate. Unit noise variance
// everywhere; the SNR grid sets the per-node transmit power P = 10^(dB/10).

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gsa/design.hpp"
#include "gsa/errors.hpp"
#include "gsa/matrix.hpp"
#include "gsa/scenario.hpp"

namespace gsa {

enum class SymbolModel { Gaussian, Qam };

struct SimConfig {
    std::vector<double> snr_grid_db;  // strictly increasing
    int trials = 1;
    std::uint64_t seed = 0;
    SymbolModel symbol_model = SymbolModel::Gaussian;
    int qam_order = 4;                // power of 4, square constellation
    bool normalize_relay_power = true;
};

struct SnrPoint {
    double snr_db = 0;
    double sum_rate_bits = 0;          // sum over directional streams of log2(1+SNR)
    std::vector<double> mse_node;      // per receiving node, unit-signal scale
};

struct SimResult {
    std::vector<SnrPoint> per_snr;
    double dof_estimate = 0;           // slope of sum_rate vs log2(SNR), top grid points
    int streams_delivered = 0;         // both directions of every pair
};

namespace detail {

inline void validate_sim_config(const SimConfig& cfg) {
    if (cfg.snr_grid_db.empty())
        throw InvalidInputError("sim: SNR grid is empty");
    for (size_t k = 1; k < cfg.snr_grid_db.size(); ++k)
        if (!(cfg.snr_grid_db[k] > cfg.snr_grid_db[k - 1]))
            throw InvalidInputError("sim: SNR grid must be strictly increasing");
    if (cfg.trials < 1)
        throw InvalidInputError("sim: trials must be >= 1");
    if (cfg.symbol_model == SymbolModel::Qam) {
        int q = cfg.qam_order;
        if (q < 4) throw InvalidInputError("sim: QAM order must be a power of 4");
        while (q % 4 == 0) q /= 4;
        if (q != 1) throw InvalidInputError("sim: QAM order must be a power of 4");
    }
}

// Unit-energy square QAM, uniform over the constellation.
inline CMatrix sample_qam(Index rows, Index cols, int order, std::uint64_t seed) {
    const int q = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    const double scale = std::sqrt(3.0 / (2.0 * (q * q - 1)));
    std::mt19937_64 rng(seed);
    CMatrix out(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) {
            const int idx = static_cast<int>(rng() % static_cast<std::uint64_t>(order));
            const int a = 2 * (idx % q) - (q - 1);
            const int b = 2 * (idx / q) - (q - 1);
            out(r, c) = Complex(a * scale, b * scale);
        }
    return out;
}

// Symbol column carrying direction (i -> j), received at j.
// Receiving-node averages use these column sets.
inline std::vector<std::vector<int>> received_columns(const PairPlan& plan) {
    std::vector<std::vector<int>> rc(plan.num_nodes());
    for (int i = 0; i < plan.num_nodes(); ++i)
        for (int p : plan.pairs_of(i)) {
            const auto& pr = plan.pairs[p];
            const int j = pr.s == i ? pr.t : pr.s;
            for (int l = 0; l < pr.d; ++l)
                rc[i].push_back(plan.col_of(j, i, l));  // partner's symbol lands at i
        }
    return rc;
}

inline double slope_top_points(const std::vector<double>& x,
                               const std::vector<double>& y, int top) {
    const int n = static_cast<int>(x.size());
    const int m = std::min(top, n);
    if (m < 2) return 0.0;
    double sx = 0, sy = 0;
    for (int k = n - m; k < n; ++k) { sx += x[k]; sy += y[k]; }
    const double mx = sx / m, my = sy / m;
    double num = 0, den = 0;
    for (int k = n - m; k < n; ++k) {
        num += (x[k] - mx) * (y[k] - my);
        den += (x[k] - mx) * (x[k] - mx);
    }
    return den == 0 ? 0.0 : num / den;
}

} // namespace detail

// Noise-free pipeline on explicit symbol columns: MAC, projection,
// broadcast, zero-forcing, side-information subtraction. Returns the
// largest entrywise recovery error over all nodes, streams and columns.
inline double noiseless_recovery_error(const GsaDesign& d, const ChannelSet& cs,
                                       const CMatrix& symbols) {
    const PairPlan& plan = d.plan;
    if (symbols.rows() != plan.total_symbols())
        throw InvalidInputError("noiseless run: symbol row count mismatch");
    const Index n = cs.H.empty() ? 0 : cs.H[0].rows();
    CMatrix y_r = CMatrix::Zero(n, symbols.cols());
    for (int i = 0; i < plan.num_nodes(); ++i)
        y_r += cs.H[i] * d.V[i] *
               symbols.middleRows(plan.col_offsets[i], d.V[i].cols());
    const CMatrix x_r = d.U * (d.A * y_r);
    double worst = 0.0;
    for (int i = 0; i < plan.num_nodes(); ++i) {
        const CMatrix z = d.rx[i] * (cs.G[i] * x_r);
        Index row = 0;
        for (int p : plan.pairs_of(i)) {
            const auto& pr = plan.pairs[p];
            const int j = pr.s == i ? pr.t : pr.s;
            for (int l = 0; l < pr.d; ++l, ++row) {
                const auto got = z.row(row) - symbols.row(plan.col_of(i, j, l));
                worst = std::max(worst,
                                 max_abs(got - symbols.row(plan.col_of(j, i, l))));
            }
        }
    }
    return worst;
}

inline double run_noiseless(const GsaDesign& d, const ChannelSet& cs,
                            std::uint64_t seed, Index num_vectors = 8) {
    return noiseless_recovery_error(
        d, cs, sample_gaussian(d.plan.total_symbols(), num_vectors, seed));
}

// Noisy Monte Carlo. Per-node transmit power P via gamma_i = sqrt(P)/||V_i||_F;
// the relay forwards beta U A y_r with beta chosen (optionally) so average
// transmit power per relay antenna equals P. Per-trial draws are shared
// across SNR points, which keeps the rate curve smooth in the grid.
inline SimResult run_noisy(const GsaDesign& d, const ChannelSet& cs,
                           const SimConfig& cfg) {
    detail::validate_sim_config(cfg);
    const PairPlan& plan = d.plan;
    const int K = plan.num_nodes();
    const int R = plan.total_relay_streams;
    const int S = plan.total_symbols();
    const Index n = cs.H.empty() ? 0 : cs.H[0].rows();
    const int npts = static_cast<int>(cfg.snr_grid_db.size());

    // P-independent pieces
    std::vector<CMatrix> proj(K);        // A H_i V_i, numerically ~ pairing columns
    std::vector<double> v_norm(K);
    for (int i = 0; i < K; ++i) {
        proj[i] = d.A * cs.H[i] * d.V[i];
        v_norm[i] = d.V[i].norm();
        if (!(v_norm[i] > 0))
            throw InvalidInputError("sim: node " + std::to_string(i + 1) +
                                    " has an empty precoder");
    }
    const CMatrix AAh = d.A * d.A.adjoint();
    const auto rc = detail::received_columns(plan);

    // per-row gamma_s^2 + gamma_t^2 coefficient of the signal covariance
    std::vector<std::pair<int, int>> row_pair(R);
    for (size_t p = 0; p < plan.pairs.size(); ++p)
        for (int l = 0; l < plan.pairs[p].d; ++l)
            row_pair[plan.row_offsets[p] + l] = {plan.pairs[p].s, plan.pairs[p].t};

    std::vector<double> power(npts), beta(npts);
    std::vector<std::vector<double>> gamma(npts, std::vector<double>(K));
    for (int k = 0; k < npts; ++k) {
        power[k] = std::pow(10.0, cfg.snr_grid_db[k] / 10.0);
        for (int i = 0; i < K; ++i) gamma[k][i] = std::sqrt(power[k]) / v_norm[i];
        if (cfg.normalize_relay_power) {
            CMatrix sig_cov = AAh;
            for (int r = 0; r < R; ++r) {
                const auto [s, t] = row_pair[r];
                sig_cov(r, r) += gamma[k][s] * gamma[k][s] + gamma[k][t] * gamma[k][t];
            }
            const double tx_power =
                ((d.U * sig_cov).cwiseProduct(d.U.conjugate())).sum().real();
            beta[k] = std::sqrt(power[k] * static_cast<double>(n) / tx_power);
        } else {
            beta[k] = 1.0;
        }
    }

    // mean squared error per directional stream, indexed by symbol column
    std::vector<std::vector<double>> acc(npts, std::vector<double>(S, 0.0));

    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t ts = mix_seed(cfg.seed, static_cast<std::uint64_t>(trial));
        const CMatrix sym =
            cfg.symbol_model == SymbolModel::Qam
                ? detail::sample_qam(S, 1, cfg.qam_order, mix_seed(ts, 0))
                : sample_gaussian(S, 1, mix_seed(ts, 0));
        const CMatrix n_r = sample_gaussian(n, 1, mix_seed(ts, 1));
        const CMatrix a_nr = d.A * n_r;
        std::vector<CMatrix> w(K);  // decoder-amplified destination noise
        for (int i = 0; i < K; ++i)
            w[i] = d.rx[i] * sample_gaussian(cs.G[i].rows(), 1,
                                             mix_seed(ts, 2 + static_cast<std::uint64_t>(i)));

        for (int k = 0; k < npts; ++k) {
            // network-coded estimate at the relay, per stream row
            CMatrix s_hat = a_nr;
            for (int i = 0; i < K; ++i)
                s_hat += gamma[k][i] * (proj[i] * sym.middleRows(plan.col_offsets[i],
                                                                 proj[i].cols()));
            for (int i = 0; i < K; ++i) {
                Index row = 0;
                for (int p : plan.pairs_of(i)) {
                    const auto& pr = plan.pairs[p];
                    const int j = pr.s == i ? pr.t : pr.s;
                    for (int l = 0; l < pr.d; ++l, ++row) {
                        const Complex z = s_hat(plan.row_offsets[p] + l, 0) +
                                          w[i](row, 0) / beta[k];
                        const Complex est =
                            (z - gamma[k][i] * sym(plan.col_of(i, j, l), 0)) /
                            gamma[k][j];
                        const Complex err = est - sym(plan.col_of(j, i, l), 0);
                        acc[k][plan.col_of(j, i, l)] += std::norm(err);
                    }
                }
            }
        }
    }

    SimResult res;
    res.streams_delivered = 2 * R;
    res.per_snr.resize(npts);
    std::vector<double> xs(npts), ys(npts);
    for (int k = 0; k < npts; ++k) {
        SnrPoint& pt = res.per_snr[k];
        pt.snr_db = cfg.snr_grid_db[k];
        pt.mse_node.assign(K, 0.0);
        double rate = 0.0;
        for (int col = 0; col < S; ++col) {
            const double mse = std::max(acc[k][col] / cfg.trials, 1e-300);
            rate += std::log2(1.0 + 1.0 / mse);
        }
        pt.sum_rate_bits = rate;
        for (int i = 0; i < K; ++i) {
            for (int col : rc[i]) pt.mse_node[i] += acc[k][col] / cfg.trials;
            if (!rc[i].empty()) pt.mse_node[i] /= static_cast<double>(rc[i].size());
        }
        xs[k] = cfg.snr_grid_db[k] * std::log2(10.0) / 10.0;  // log2 of linear SNR
        ys[k] = pt.sum_rate_bits;
    }
    res.dof_estimate = detail::slope_top_points(xs, ys, 3);
    return res;
}

} // namespace gsa
