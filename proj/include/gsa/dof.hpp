#pragma once

// Counting and feasibility mathematics: DoF upper bounds, antenna
// thresholds in exact rational arithmetic, and the minimum-relay-antenna
// computation over a data switch matrix.

#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gsa/errors.hpp"
#include "gsa/scenario.hpp"

namespace gsa {

// Exact rational for threshold comparisons; avoids float boundary
// misclassification at equality cases like K=4, M=3, N=7.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1) : num(n), den(d) {
        if (den == 0) throw InvalidInputError("rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    long long ceil() const {
        return num >= 0 ? (num + den - 1) / den : -((-num) / den);
    }
    bool is_integer() const { return den == 1; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num * b.den < b.num * a.den;
    }
};

inline std::string to_string(const Rational& r) {
    return r.den == 1 ? std::to_string(r.num)
                      : std::to_string(r.num) + "/" + std::to_string(r.den);
}

// Fig. 2 point P3: the equal-antenna relay threshold (K^2-3K+3)M/(K-1).
inline Rational theorem1_threshold(int K, int M) {
    if (K < 3 || M < 1) throw InvalidInputError("theorem1_threshold: need K >= 3, M >= 1");
    const long long k = K, m = M;
    return Rational((k * k - 3 * k + 3) * m, k - 1);
}

// Fig. 2 point P4: the earlier scheme's threshold (K^2-2K)M/(K-1), kept
// for comparison output.
inline Rational prior_threshold(int K, int M) {
    if (K < 3 || M < 1) throw InvalidInputError("prior_threshold: need K >= 3, M >= 1");
    const long long k = K, m = M;
    return Rational((k * k - 2 * k) * m, k - 1);
}

// Cut-set total bound min{sum M_i, 2 sum_{i>=2} M_i, 2N}, evaluated on the
// original antenna counts (the bound predates deactivation).
inline int total_dof_upper_bound(const EffectiveScenario& es) {
    const auto& M = es.base.M;
    const int sum_all = std::accumulate(M.begin(), M.end(), 0);
    const int sum_others = sum_all - M[0];
    return std::min({sum_all, 2 * sum_others, 2 * es.base.N});
}

// Per-node bound min{M_i, sum_{j != i} M_j, N}; node is a 0-based internal
// index.
inline int per_node_bound(const EffectiveScenario& es, int node) {
    const auto& M = es.base.M;
    if (node < 0 || node >= es.base.K)
        throw InvalidInputError("per_node_bound: node out of range");
    const int sum_all = std::accumulate(M.begin(), M.end(), 0);
    return std::min({M[node], sum_all - M[node], es.base.N});
}

struct MinRelayResult {
    int n_min = 0;
    std::pair<int, int> binding{0, 0};  // 0-based internal indices, s < t
};

// Minimum relay antennas for a given switch matrix: for every active
// (i,j), delete row i and column j of D and sum what remains; the answer
// is the maximum over pairs. Requires row sums equal to the effective
// antenna vector, which is what makes the deleted-sum coincide with
// sum(M_eff) - M_s - M_t + d_{s,t}.
inline MinRelayResult min_relay_antennas(const DataSwitchMatrix& D,
                                         const EffectiveScenario& es) {
    const int K = es.base.K;
    if (D.size() != K)
        throw InvalidInputError("min_relay_antennas: D dimension mismatch");
    for (int i = 0; i < K; ++i)
        if (D.row_sum(i) != es.M_eff[i])
            throw InvalidInputError("min_relay_antennas: row sum of node " +
                                    std::to_string(i + 1) + " does not match M_eff");

    MinRelayResult res;
    bool any = false;
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            if (D(i, j) == 0) continue;
            int sum = 0;
            for (int r = 0; r < K; ++r) {
                if (r == i) continue;
                for (int c = 0; c < K; ++c) {
                    if (c == j) continue;
                    sum += D(r, c);
                }
            }
            if (!any || sum > res.n_min) {
                res.n_min = sum;
                res.binding = {std::min(i, j), std::max(i, j)};
                any = true;
            }
        }
    }
    if (!any) res.binding = {-1, -1};  // no traffic
    return res;
}

enum class TheoremTag { EqualAntennas, Star, General };

inline std::string to_string(TheoremTag t) {
    switch (t) {
        case TheoremTag::EqualAntennas: return "equal-antennas";
        case TheoremTag::Star: return "star";
        case TheoremTag::General: return "general";
    }
    return "general";
}

struct FeasibilityReport {
    int total_upper_bound = 0;
    std::vector<int> per_node_bounds;      // caller node order
    int min_n_required = 0;
    std::pair<int, int> binding_pair{0, 0};  // 1-based caller labels
    TheoremTag theorem_applied = TheoremTag::General;
    bool feasible_at_n = false;
    std::vector<std::string> notes;
};

namespace detail {

inline bool is_star_traffic(const DataSwitchMatrix& D) {
    for (int i = 1; i < D.size(); ++i)
        for (int j = 1; j < D.size(); ++j)
            if (i != j && D(i, j) != 0) return false;
    bool hub_active = false;
    for (int j = 1; j < D.size(); ++j)
        if (D(0, j) != 0) hub_active = true;
    return hub_active;
}

// Closed-form fallback when row sums do not match: max over active pairs
// of sum(M_eff) - M_s - M_t + d_{s,t}.
inline MinRelayResult closed_form_min_relay(const DataSwitchMatrix& D,
                                            const EffectiveScenario& es) {
    const int K = es.base.K;
    const int sum = es.sum_M_eff();
    MinRelayResult res;
    bool any = false;
    for (int s = 0; s < K; ++s)
        for (int t = s + 1; t < K; ++t) {
            if (D(s, t) == 0 && D(t, s) == 0) continue;
            const int v = sum - es.M_eff[s] - es.M_eff[t] + std::max(D(s, t), D(t, s));
            if (!any || v > res.n_min) {
                res.n_min = v;
                res.binding = {s, t};
                any = true;
            }
        }
    if (!any) res.binding = {-1, -1};
    return res;
}

} // namespace detail

// Aggregated feasibility report for the scenario's own switch matrix.
// Diagnoses, but does not enforce, the N > M_i + M_j working regime.
inline FeasibilityReport analyze(const Scenario& sc) {
    const EffectiveScenario es = effective_antennas(sc);
    FeasibilityReport rep;
    rep.total_upper_bound = total_dof_upper_bound(es);

    rep.per_node_bounds.assign(sc.K, 0);
    for (int i = 0; i < sc.K; ++i)
        rep.per_node_bounds[sc.node_labels[i] - 1] = per_node_bound(es, i);

    const auto structural = validate_switch_matrix(sc.D, sc, false);
    if (!structural.ok())
        throw InvalidInputError("analyze: invalid switch matrix: " + structural.issues.front());

    const bool row_sums_ok = validate_switch_matrix(sc.D, sc, true).ok();
    MinRelayResult mr;
    if (row_sums_ok) {
        mr = min_relay_antennas(sc.D, es);
    } else {
        mr = detail::closed_form_min_relay(sc.D, es);
        rep.notes.push_back("row sums do not match M_eff; closed-form pair condition used");
        if (es.sum_M_eff() % 2 != 0)
            rep.notes.push_back("parity infeasibility: sum of effective antennas is odd, "
                                "no symmetric switch matrix attains the per-node bounds");
    }
    rep.min_n_required = mr.n_min;
    if (mr.binding.first >= 0)
        rep.binding_pair = {sc.node_labels[mr.binding.first],
                            sc.node_labels[mr.binding.second]};
    else
        rep.binding_pair = {0, 0};
    rep.feasible_at_n = sc.N >= rep.min_n_required;

    if (es.deactivated > 0)
        rep.notes.push_back("node " + std::to_string(sc.node_labels[0]) +
                            " deactivates " + std::to_string(es.deactivated) + " of " +
                            std::to_string(sc.M[0]) + " antennas (first " +
                            std::to_string(es.M_eff[0]) + " kept)");

    const bool equal = std::all_of(sc.M.begin(), sc.M.end(),
                                   [&](int m) { return m == sc.M[0]; });
    const int sum_others = std::accumulate(sc.M.begin() + 1, sc.M.end(), 0);
    if (equal)
        rep.theorem_applied = TheoremTag::EqualAntennas;
    else if (sc.M[0] >= sum_others && detail::is_star_traffic(sc.D))
        rep.theorem_applied = TheoremTag::Star;
    else
        rep.theorem_applied = TheoremTag::General;

    bool regime = true;
    for (int i = 0; i < sc.K && regime; ++i)
        for (int j = i + 1; j < sc.K && regime; ++j)
            if (sc.N <= sc.M[i] + sc.M[j]) regime = false;
    if (!regime)
        rep.notes.push_back("outside working regime N > M_i + M_j; construction attempted anyway");

    const int relay_streams = sc.D.total() / 2;
    if (relay_streams > sc.N)
        rep.notes.push_back("relay streams " + std::to_string(relay_streams) +
                            " exceed N; projection cannot have independent rows");

    if (equal && rep.theorem_applied == TheoremTag::EqualAntennas) {
        const int K = sc.K, M = sc.M[0];
        if (K >= 3) {
            const Rational p3 = theorem1_threshold(K, M);
            const Rational p4 = prior_threshold(K, M);
            rep.notes.push_back("equal-antenna thresholds: P3 = " + to_string(p3) +
                                ", P4 = " + to_string(p4));
        }
    }
    return rep;
}

} // namespace gsa
