#pragma once

// Data-switch-matrix synthesis from target row sums. A symmetric
// zero-diagonal nonnegative integer matrix with row sums d exists iff the
// sum is even and no node wants more than all others combined (multigraph
// degree realizability). Two objectives: any valid matrix, or one whose
// required relay antenna count is minimal.

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "gsa/errors.hpp"
#include "gsa/scenario.hpp"

namespace gsa {

enum class SynthesisObjective { AnyValid, MinimizeRequiredN };

struct SynthesisRequest {
    std::vector<int> M_eff;  // target row sums
    SynthesisObjective objective = SynthesisObjective::AnyValid;
};

// Relay antennas a given matrix needs: for every active (i,j), the total
// minus row i and column j sums; maximum over pairs. Zero if no traffic.
inline int required_relay_antennas(const DataSwitchMatrix& D) {
    const int K = D.size();
    const int total = D.total();
    int worst = 0;
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            if (D(i, j) > 0)
                worst = std::max(worst, total - D.row_sum(i) - D.row_sum(j) + D(i, j));
    return worst;
}

namespace detail {

inline void check_realizable(const std::vector<int>& d) {
    if (d.size() < 2)
        throw InvalidInputError("synthesis: need at least two nodes");
    long long sum = 0;
    int max_d = 0, argmax = 0;
    for (size_t i = 0; i < d.size(); ++i) {
        if (d[i] < 0) throw InvalidInputError("synthesis: negative stream count");
        sum += d[i];
        if (d[i] > max_d) { max_d = d[i]; argmax = static_cast<int>(i); }
    }
    if (sum % 2 != 0)
        throw InfeasibleRequestError(
            "synthesis: total stream count " + std::to_string(sum) +
            " is odd; a symmetric zero-diagonal matrix needs an even sum (parity)");
    if (max_d > sum - max_d)
        throw InfeasibleRequestError(
            "synthesis: node " + std::to_string(argmax + 1) + " requests " +
            std::to_string(max_d) + " streams but all others combined offer only " +
            std::to_string(sum - max_d) + " (realizability)");
}

// Repeatedly connect the two largest remaining degrees by one unit.
// Connecting the two largest keeps the degree sequence realizable, so
// this always completes on a realizable input. Ties go to lower index.
inline DataSwitchMatrix greedy_pairing(const std::vector<int>& target) {
    const int K = static_cast<int>(target.size());
    DataSwitchMatrix D = DataSwitchMatrix::zero(K);
    std::vector<int> rem = target;
    for (;;) {
        int a = -1, b = -1;
        for (int i = 0; i < K; ++i) {
            if (rem[i] == 0) continue;
            if (a < 0 || rem[i] > rem[a]) { b = a; a = i; }
            else if (b < 0 || rem[i] > rem[b]) { b = i; }
        }
        if (a < 0) break;       // all satisfied
        if (b < 0)              // cannot happen on a realizable sequence
            throw InfeasibleRequestError("synthesis: greedy pairing stuck");
        D(a, b) += 1;
        D(b, a) += 1;
        --rem[a];
        --rem[b];
    }
    return D;
}

// Is there a valid matrix whose every active pair (i,j) keeps
// total - d_i - d_j + D(i,j) <= budget? Equivalent to per-pair caps
// budget - (total - d_i - d_j). Depth-first over pairs in lexicographic
// order, larger values first, pruning nodes whose remaining demand cannot
// be met by their undecided pairs.
struct CapSearch {
    int K;
    long long total;
    const std::vector<int>& d;
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> cap;
    std::vector<int> rem;
    // undecided capacity per node, maintained as pairs get fixed
    std::vector<long long> open;
    DataSwitchMatrix out;

    CapSearch(const std::vector<int>& target, int budget)
        : K(static_cast<int>(target.size())),
          total(std::accumulate(target.begin(), target.end(), 0LL)),
          d(target),
          out(DataSwitchMatrix::zero(K)) {
        for (int i = 0; i < K; ++i)
            for (int j = i + 1; j < K; ++j) {
                pairs.emplace_back(i, j);
                cap.push_back(static_cast<int>(
                    std::max<long long>(0, budget - (total - d[i] - d[j]))));
            }
        rem = target;
        open.assign(K, 0);
        for (size_t p = 0; p < pairs.size(); ++p) {
            open[pairs[p].first] += cap[p];
            open[pairs[p].second] += cap[p];
        }
    }

    bool run() { return dfs(0); }

    bool dfs(size_t p) {
        if (p == pairs.size()) {
            for (int i = 0; i < K; ++i)
                if (rem[i] != 0) return false;
            return true;
        }
        const auto [i, j] = pairs[p];
        open[i] -= cap[p];
        open[j] -= cap[p];
        const int hi = std::min({cap[p], rem[i], rem[j]});
        for (int v = hi; v >= 0; --v) {
            if (rem[i] - v > open[i] || rem[j] - v > open[j]) continue;
            rem[i] -= v;
            rem[j] -= v;
            out(i, j) = out(j, i) = v;
            if (dfs(p + 1)) return true;
            rem[i] += v;
            rem[j] += v;
            out(i, j) = out(j, i) = 0;
        }
        open[i] += cap[p];
        open[j] += cap[p];
        return false;
    }
};

} // namespace detail

inline DataSwitchMatrix synthesize_switch_matrix(const SynthesisRequest& req) {
    detail::check_realizable(req.M_eff);
    const DataSwitchMatrix greedy = detail::greedy_pairing(req.M_eff);
    if (req.objective == SynthesisObjective::AnyValid) return greedy;

    // exact minimum: the smallest budget admitting a valid matrix. The
    // greedy result bounds the search from above; the lower bound comes
    // from the best conceivable pair (the two largest row sums, one unit).
    const long long total =
        std::accumulate(req.M_eff.begin(), req.M_eff.end(), 0LL);
    if (total == 0) return greedy;  // no traffic, nothing to minimize
    std::vector<int> sorted = req.M_eff;
    std::sort(sorted.rbegin(), sorted.rend());
    const int lo = static_cast<int>(total - sorted[0] - sorted[1] + 1);
    const int hi = required_relay_antennas(greedy);
    for (int budget = std::max(lo, 1); budget <= hi; ++budget) {
        detail::CapSearch search(req.M_eff, budget);
        if (search.run()) return search.out;
    }
    return greedy;  // unreachable: hi always admits the greedy matrix
}

} // namespace gsa
