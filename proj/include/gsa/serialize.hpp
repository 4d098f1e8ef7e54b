#pragma once

// JSON and CSV bindings. Node-facing order in every document is the
// caller's original 1-based order; the internal sorted order never leaks.
// Key order is fixed so identical runs produce identical bytes.

#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gsa/design.hpp"
#include "gsa/dof.hpp"
#include "gsa/errors.hpp"
#include "gsa/scenario.hpp"
#include "gsa/sim.hpp"

namespace gsa {

using Json = nlohmann::ordered_json;

struct ScenarioDocument {
    Scenario scenario;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline int require_int(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw InvalidInputError(std::string("scenario JSON: missing integer \"") +
                                key + "\"");
    return j[key].get<int>();
}

inline std::vector<int> require_int_array(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array())
        throw InvalidInputError(std::string("scenario JSON: missing array \"") +
                                key + "\"");
    std::vector<int> out;
    for (const auto& v : j[key]) {
        if (!v.is_number_integer())
            throw InvalidInputError(std::string("scenario JSON: \"") + key +
                                    "\" must hold integers");
        out.push_back(v.get<int>());
    }
    return out;
}

inline bool all_equal(const std::vector<int>& v) {
    for (int x : v)
        if (x != v.front()) return false;
    return true;
}

inline Scenario scenario_from_preset(const Json& preset, const std::vector<int>& M,
                                     int N) {
    if (!preset.contains("kind") || !preset["kind"].is_string())
        throw InvalidInputError("scenario JSON: preset needs a string \"kind\"");
    const std::string kind = preset["kind"].get<std::string>();
    const int K = static_cast<int>(M.size());
    if (kind == "y") {
        if (!all_equal(M))
            throw InvalidInputError("scenario JSON: the y preset needs equal M");
        return preset_y(K, M.front(), N);
    }
    if (kind == "star") return preset_star(M, N);
    if (kind == "xrelay") {
        if (!all_equal(M))
            throw InvalidInputError("scenario JSON: the xrelay preset needs equal M");
        return preset_xrelay(K, M.front(), N);
    }
    if (kind == "multipair") {
        if (!preset.contains("pairs") || !preset["pairs"].is_array())
            throw InvalidInputError("scenario JSON: multipair preset needs \"pairs\"");
        std::vector<std::pair<int, int>> pairs;
        for (const auto& p : preset["pairs"]) {
            if (!p.is_array() || p.size() != 2)
                throw InvalidInputError("scenario JSON: each pair is [a, b]");
            pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
        return preset_multipair(M, pairs, N);
    }
    if (kind == "cluster") {
        if (!preset.contains("clusters") || !preset["clusters"].is_array())
            throw InvalidInputError("scenario JSON: cluster preset needs \"clusters\"");
        std::vector<std::vector<int>> clusters;
        for (const auto& c : preset["clusters"]) {
            if (!c.is_array())
                throw InvalidInputError("scenario JSON: each cluster is a label list");
            clusters.push_back(c.get<std::vector<int>>());
        }
        return preset_cluster(M, clusters, N);
    }
    throw InvalidInputError("scenario JSON: unknown preset kind \"" + kind + "\"");
}

} // namespace detail

// --- scenario ---------------------------------------------------------------

inline Json scenario_to_json(const Scenario& sc,
                             std::optional<std::uint64_t> seed = {}) {
    Json j;
    j["K"] = sc.K;
    std::vector<int> m(sc.K);
    std::vector<std::vector<int>> d(sc.K, std::vector<int>(sc.K, 0));
    for (int label = 1; label <= sc.K; ++label) {
        const int i = sc.index_of_label(label);
        m[label - 1] = sc.M[i];
        for (int other = 1; other <= sc.K; ++other)
            d[label - 1][other - 1] = sc.D(i, sc.index_of_label(other));
    }
    j["M"] = m;
    j["N"] = sc.N;
    j["D"] = d;
    if (seed) j["seed"] = *seed;
    return j;
}

inline ScenarioDocument scenario_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidInputError("scenario JSON: not an object");
    ScenarioDocument doc;
    const int K = detail::require_int(j, "K");
    const std::vector<int> M = detail::require_int_array(j, "M");
    const int N = detail::require_int(j, "N");
    if (static_cast<int>(M.size()) != K)
        throw InvalidInputError("scenario JSON: M has " + std::to_string(M.size()) +
                                " entries for K=" + std::to_string(K));
    if (j.contains("D")) {
        const auto& dj = j["D"];
        if (!dj.is_array() || static_cast<int>(dj.size()) != K)
            throw InvalidInputError("scenario JSON: D must be a KxK array");
        Eigen::MatrixXi d(K, K);
        for (int r = 0; r < K; ++r) {
            if (!dj[r].is_array() || static_cast<int>(dj[r].size()) != K)
                throw InvalidInputError("scenario JSON: D row " + std::to_string(r + 1) +
                                        " is not length K");
            for (int c = 0; c < K; ++c) {
                if (!dj[r][c].is_number_integer())
                    throw InvalidInputError("scenario JSON: D entries must be integers");
                d(r, c) = dj[r][c].get<int>();
            }
        }
        doc.scenario = make_scenario(M, N, DataSwitchMatrix(std::move(d)));
    } else if (j.contains("preset")) {
        doc.scenario = detail::scenario_from_preset(j["preset"], M, N);
    } else {
        throw InvalidInputError("scenario JSON: needs either \"D\" or \"preset\"");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer())
            throw InvalidInputError("scenario JSON: seed must be an integer");
        doc.seed = j["seed"].get<std::uint64_t>();
    }
    return doc;
}

inline ScenarioDocument scenario_from_string(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInputError(std::string("scenario JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

// --- feasibility report -----------------------------------------------------

inline Json report_to_json(const FeasibilityReport& rep) {
    Json j;
    j["total_upper_bound"] = rep.total_upper_bound;
    j["per_node_bounds"] = rep.per_node_bounds;
    j["min_N_required"] = rep.min_n_required;
    if (rep.binding_pair.first > 0)
        j["binding_pair"] = {rep.binding_pair.first, rep.binding_pair.second};
    else
        j["binding_pair"] = nullptr;
    j["theorem_applied"] = to_string(rep.theorem_applied);
    j["feasible_at_N"] = rep.feasible_at_n;
    j["notes"] = rep.notes;
    return j;
}

// --- design bundle ----------------------------------------------------------

inline Json matrix_to_json(const CMatrix& m) {
    Json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    Json entries = Json::array();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c)
            entries.push_back({m(r, c).real(), m(r, c).imag()});
    j["entries"] = std::move(entries);
    return j;
}

inline Json design_to_json(const GsaDesign& d,
                           const std::vector<int>& labels = {}) {
    const auto label_of = [&](int internal) {
        return labels.empty() ? internal + 1 : labels[internal];
    };
    Json j;
    j["relay_streams"] = d.plan.total_relay_streams;
    j["symbols"] = d.plan.total_symbols();
    Json pairs = Json::array();
    for (const auto& pr : d.plan.pairs)
        pairs.push_back({{"s", label_of(pr.s)}, {"t", label_of(pr.t)},
                         {"streams", pr.d}});
    j["pairs"] = std::move(pairs);
    j["identity_residual"] = d.identity_residual;
    j["A"] = matrix_to_json(d.A);
    j["U"] = matrix_to_json(d.U);
    j["P"] = matrix_to_json(d.P);
    Json v = Json::array(), rx = Json::array();
    for (const auto& m : d.V) v.push_back(matrix_to_json(m));
    for (const auto& m : d.rx) rx.push_back(matrix_to_json(m));
    j["V"] = std::move(v);
    j["rx"] = std::move(rx);
    return j;
}

// --- simulation results -----------------------------------------------------

// labels[i] = caller 1-based label of internal node i; empty = identity.
inline std::string sim_result_to_csv(const SimResult& res,
                                     const std::vector<int>& labels = {}) {
    const int K = res.per_snr.empty()
                      ? static_cast<int>(labels.size())
                      : static_cast<int>(res.per_snr.front().mse_node.size());
    std::vector<int> internal_of_label(K, 0);
    for (int i = 0; i < K; ++i) {
        const int label = labels.empty() ? i + 1 : labels[i];
        internal_of_label[label - 1] = i;
    }
    std::string out = "snr_db,sum_rate_bits";
    for (int l = 1; l <= K; ++l) out += ",mse_node_" + std::to_string(l);
    out += "\n";
    for (const auto& pt : res.per_snr) {
        out += detail::format_double(pt.snr_db);
        out += ",";
        out += detail::format_double(pt.sum_rate_bits);
        for (int l = 1; l <= K; ++l) {
            out += ",";
            out += detail::format_double(pt.mse_node[internal_of_label[l - 1]]);
        }
        out += "\n";
    }
    return out;
}

inline Json sim_result_to_json(const SimResult& res,
                               const std::vector<int>& labels = {}) {
    const int K = res.per_snr.empty()
                      ? static_cast<int>(labels.size())
                      : static_cast<int>(res.per_snr.front().mse_node.size());
    std::vector<int> internal_of_label(K, 0);
    for (int i = 0; i < K; ++i) {
        const int label = labels.empty() ? i + 1 : labels[i];
        internal_of_label[label - 1] = i;
    }
    Json j;
    j["streams_delivered"] = res.streams_delivered;
    j["dof_estimate"] = res.dof_estimate;
    Json pts = Json::array();
    for (const auto& pt : res.per_snr) {
        Json p;
        p["snr_db"] = pt.snr_db;
        p["sum_rate_bits"] = pt.sum_rate_bits;
        std::vector<double> mse(K);
        for (int l = 1; l <= K; ++l) mse[l - 1] = pt.mse_node[internal_of_label[l - 1]];
        p["mse_node"] = mse;
        pts.push_back(std::move(p));
    }
    j["per_snr"] = std::move(pts);
    return j;
}

inline Json switch_matrix_to_json(const DataSwitchMatrix& D) {
    Json rows = Json::array();
    for (int i = 0; i < D.size(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < D.size(); ++j) row.push_back(D(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace gsa
