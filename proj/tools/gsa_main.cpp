// Command-line front end: feasibility analysis, switch-matrix synthesis,
// end-to-end simulation and threshold sweeps. Batch only; node indices in
// all input and output are 1-based. Exit codes: 0 success/feasible,
// 1 input error, 2 infeasible, 3 internal verification failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsa/design.hpp"
#include "gsa/dof.hpp"
#include "gsa/errors.hpp"
#include "gsa/scenario.hpp"
#include "gsa/serialize.hpp"
#include "gsa/sim.hpp"
#include "gsa/synthesis.hpp"

namespace {

using gsa::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitVerification = 3;
constexpr int kSweepSeedsPerPoint = 20;

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw gsa::InvalidInputError(std::string(what) + ": bad integer \"" +
                                         item + "\"");
        }
    }
    if (out.empty())
        throw gsa::InvalidInputError(std::string(what) + ": empty list");
    return out;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(text);
    std::string group;
    while (std::getline(ss, group, ';')) {
        const auto v = parse_int_list(group, "--pairs");
        if (v.size() != 2)
            throw gsa::InvalidInputError("--pairs: each group is two labels a,b");
        out.emplace_back(v[0], v[1]);
    }
    return out;
}

std::vector<std::vector<int>> parse_clusters(const std::string& text) {
    std::vector<std::vector<int>> out;
    std::stringstream ss(text);
    std::string group;
    while (std::getline(ss, group, ';'))
        out.push_back(parse_int_list(group, "--clusters"));
    return out;
}

// "lo:hi:step", "lo:hi" (step 10) or a single value, in dB
std::vector<double> parse_snr_grid(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw gsa::InvalidInputError("--snr: bad number \"" + item + "\"");
        }
    }
    if (parts.size() == 1) return parts;
    if (parts.size() == 2) parts.push_back(10.0);
    if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0])
        throw gsa::InvalidInputError("--snr: expected lo:hi:step with step > 0");
    std::vector<double> grid;
    for (double v = parts[0]; v <= parts[1] + 1e-9; v += parts[2]) grid.push_back(v);
    return grid;
}

// "lo:hi" inclusive or a single value
std::pair<int, int> parse_int_range(const std::string& text, const char* what) {
    const auto v = parse_int_list(
        [&] {
            std::string t = text;
            for (char& c : t)
                if (c == ':') c = ',';
            return t;
        }(),
        what);
    if (v.size() == 1) return {v[0], v[0]};
    if (v.size() != 2 || v[1] < v[0])
        throw gsa::InvalidInputError(std::string(what) + ": expected lo:hi with hi >= lo");
    return {v[0], v[1]};
}

struct ScenarioFlags {
    std::string scenario_path;
    std::string preset;
    int K = 0;
    std::string M;
    int N = 0;
    std::string pairs;
    std::string clusters;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f, bool with_n = true) {
    cmd->add_option("--scenario", f.scenario_path, "scenario JSON file");
    cmd->add_option("--preset", f.preset,
                    "preset kind: y|star|xrelay|multipair|cluster");
    cmd->add_option("--K", f.K, "node count (equal-antenna presets)");
    cmd->add_option("--M", f.M, "antennas per node, scalar or comma list");
    if (with_n) cmd->add_option("--N", f.N, "relay antennas");
    cmd->add_option("--pairs", f.pairs, "multipair groups, e.g. 1,2;3,4");
    cmd->add_option("--clusters", f.clusters, "cluster groups, e.g. 1,2,3;4,5");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gsa::InvalidInputError("cannot open \"" + path + "\"");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// resolves --scenario / --preset flags into a scenario; N may be overridden
gsa::ScenarioDocument load_scenario(const ScenarioFlags& f,
                                    std::optional<int> n_override = {}) {
    if (!f.scenario_path.empty() && !f.preset.empty())
        throw gsa::InvalidInputError("give either --scenario or --preset, not both");
    if (!f.scenario_path.empty()) {
        gsa::ScenarioDocument doc = gsa::scenario_from_string(slurp(f.scenario_path));
        if (n_override) {
            Json j = gsa::scenario_to_json(doc.scenario, doc.seed);
            j["N"] = *n_override;
            doc = gsa::scenario_from_json(j);
        }
        return doc;
    }
    if (f.preset.empty())
        throw gsa::InvalidInputError("a scenario is required: --scenario or --preset");
    if (f.M.empty()) throw gsa::InvalidInputError("--preset needs --M");
    std::vector<int> M = parse_int_list(f.M, "--M");
    const int n = n_override.value_or(f.N);
    if (n <= 0) throw gsa::InvalidInputError("--N must be a positive integer");
    gsa::ScenarioDocument doc;
    if (f.preset == "y" || f.preset == "xrelay") {
        int K = f.K;
        if (M.size() > 1 && K == 0) K = static_cast<int>(M.size());
        if (M.size() == 1 && K > 0) M.assign(K, M.front());
        if (K == 0) throw gsa::InvalidInputError("--preset " + f.preset + " needs --K");
        for (int m : M)
            if (m != M.front())
                throw gsa::InvalidInputError("--preset " + f.preset + " needs equal M");
        doc.scenario = f.preset == "y" ? gsa::preset_y(K, M.front(), n)
                                       : gsa::preset_xrelay(K, M.front(), n);
        return doc;
    }
    if (f.K > 0 && static_cast<int>(M.size()) != f.K) {
        if (M.size() == 1) M.assign(f.K, M.front());
        else throw gsa::InvalidInputError("--M length does not match --K");
    }
    if (f.preset == "star") {
        doc.scenario = gsa::preset_star(M, n);
    } else if (f.preset == "multipair") {
        if (f.pairs.empty()) throw gsa::InvalidInputError("multipair needs --pairs");
        doc.scenario = gsa::preset_multipair(M, parse_pairs(f.pairs), n);
    } else if (f.preset == "cluster") {
        if (f.clusters.empty()) throw gsa::InvalidInputError("cluster needs --clusters");
        doc.scenario = gsa::preset_cluster(M, parse_clusters(f.clusters), n);
    } else {
        throw gsa::InvalidInputError("unknown preset \"" + f.preset + "\"");
    }
    return doc;
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw gsa::InvalidInputError("cannot write \"" + out_path + "\"");
    out << content;
}

int run_analyze(const ScenarioFlags& flags, const std::string& out_path) {
    const gsa::ScenarioDocument doc = load_scenario(flags);
    const gsa::FeasibilityReport rep = gsa::analyze(doc.scenario);
    write_output(out_path, gsa::report_to_json(rep).dump(2) + "\n");
    return rep.feasible_at_n ? kExitOk : kExitInfeasible;
}

int run_synthesize(const std::string& m_list, const std::string& objective,
                   const std::string& out_path) {
    if (m_list.empty()) throw gsa::InvalidInputError("synthesize needs --M");
    gsa::SynthesisRequest req;
    req.M_eff = parse_int_list(m_list, "--M");
    if (objective == "any")
        req.objective = gsa::SynthesisObjective::AnyValid;
    else if (objective == "min-n")
        req.objective = gsa::SynthesisObjective::MinimizeRequiredN;
    else
        throw gsa::InvalidInputError("--objective must be any or min-n");
    const gsa::DataSwitchMatrix D = gsa::synthesize_switch_matrix(req);
    Json j;
    j["M_eff"] = req.M_eff;
    j["objective"] = objective;
    j["D"] = gsa::switch_matrix_to_json(D);
    j["required_N"] = gsa::required_relay_antennas(D);
    write_output(out_path, j.dump(2) + "\n");
    return kExitOk;
}

struct SimFlags {
    std::string snr = "10:40:10";
    int trials = 100;
    std::uint64_t seed = 1;
    bool seed_given = false;
    int extend = 1;
    std::string format = "csv";
    std::string out_path;
    std::string design_out;
    std::string symbols = "gaussian";
    int qam_order = 4;
    bool no_relay_norm = false;
};

int run_simulate(const ScenarioFlags& flags, const SimFlags& sf) {
    if (sf.extend < 1) throw gsa::InvalidInputError("--extend must be >= 1");

    gsa::Scenario base;
    gsa::Scenario target;
    std::optional<std::uint64_t> file_seed;
    if (flags.scenario_path.empty() && flags.preset == "y" && sf.extend > 1) {
        // the extension entry point accepts per-pair loads that only
        // become integral after extension
        const std::vector<int> M = parse_int_list(flags.M, "--M");
        int K = flags.K > 0 ? flags.K : static_cast<int>(M.size());
        if (K < 3) throw gsa::InvalidInputError("--preset y needs --K >= 3");
        for (int m : M)
            if (m != M.front())
                throw gsa::InvalidInputError("--preset y needs equal M");
        if (flags.N <= 0) throw gsa::InvalidInputError("--N must be a positive integer");
        base = gsa::make_scenario(std::vector<int>(K, M.front()), flags.N);
        target = gsa::extend_y_channel(K, M.front(), flags.N, sf.extend).extended;
    } else {
        const gsa::ScenarioDocument doc = load_scenario(flags);
        file_seed = doc.seed;
        base = doc.scenario;
        target = sf.extend > 1 ? gsa::extend_symbols(base, sf.extend).extended : base;
    }
    const std::uint64_t seed =
        sf.seed_given ? sf.seed : file_seed.value_or(sf.seed);

    const gsa::FeasibilityReport rep = gsa::analyze(target);
    if (!rep.feasible_at_n) {
        std::cerr << gsa::report_to_json(rep).dump(2) << "\n";
        return kExitInfeasible;
    }

    const gsa::EffectiveScenario es_base = gsa::effective_antennas(base);
    const gsa::EffectiveScenario es = gsa::effective_antennas(target);
    gsa::ChannelSet cs = gsa::sample_channels(es_base, seed);
    if (sf.extend > 1) {
        gsa::SymbolExtension ext;
        ext.factor = sf.extend;
        cs = ext.lift(cs);
    }
    const gsa::GsaDesign design = gsa::build_design(es, cs);

    const gsa::Tolerance tol;
    const double noiseless = gsa::run_noiseless(design, cs, gsa::mix_seed(seed, 9001));
    if (!(noiseless <= 10 * tol.verify_tol)) {
        std::cerr << "noiseless verification failed: max recovery error "
                  << noiseless << "\n";
        return kExitVerification;
    }

    if (!sf.design_out.empty())
        write_output(sf.design_out,
                     gsa::design_to_json(design, target.node_labels).dump(2) + "\n");

    gsa::SimConfig cfg;
    cfg.snr_grid_db = parse_snr_grid(sf.snr);
    cfg.trials = sf.trials;
    cfg.seed = gsa::mix_seed(seed, 7);
    cfg.normalize_relay_power = !sf.no_relay_norm;
    if (sf.symbols == "gaussian") {
        cfg.symbol_model = gsa::SymbolModel::Gaussian;
    } else if (sf.symbols == "qam") {
        cfg.symbol_model = gsa::SymbolModel::Qam;
        cfg.qam_order = sf.qam_order;
    } else {
        throw gsa::InvalidInputError("--symbols must be gaussian or qam");
    }

    gsa::SimResult res = gsa::run_noisy(design, cs, cfg);
    if (sf.extend > 1) {
        // report per channel use, not per extended block
        res.dof_estimate /= sf.extend;
        for (auto& pt : res.per_snr) pt.sum_rate_bits /= sf.extend;
    }

    if (sf.format == "csv") {
        write_output(sf.out_path, gsa::sim_result_to_csv(res, target.node_labels));
    } else if (sf.format == "json") {
        Json j = gsa::sim_result_to_json(res, target.node_labels);
        j["extension_factor"] = sf.extend;
        j["noiseless_error"] = noiseless;
        write_output(sf.out_path, j.dump(2) + "\n");
    } else {
        throw gsa::InvalidInputError("--format must be csv or json");
    }
    return kExitOk;
}

int run_sweep(const ScenarioFlags& flags, const std::string& n_range,
              std::uint64_t seed, const std::string& format,
              const std::string& out_path) {
    if (n_range.empty()) throw gsa::InvalidInputError("sweep needs --N lo:hi");
    const auto [lo, hi] = parse_int_range(n_range, "--N");
    if (lo < 1) throw gsa::InvalidInputError("--N must start at 1 or above");

    std::string csv = "N,feasible,construction_success_rate\n";
    Json rows = Json::array();
    for (int n = lo; n <= hi; ++n) {
        const gsa::ScenarioDocument doc = load_scenario(flags, n);
        const gsa::FeasibilityReport rep = gsa::analyze(doc.scenario);
        const gsa::EffectiveScenario es = gsa::effective_antennas(doc.scenario);
        int ok = 0;
        for (int s = 0; s < kSweepSeedsPerPoint; ++s) {
            try {
                const gsa::ChannelSet cs = gsa::sample_channels(
                    es, gsa::mix_seed(seed, static_cast<std::uint64_t>(n) * 1000 + s));
                (void)gsa::build_design(es, cs);
                ++ok;
            } catch (const gsa::Error&) {
                // infeasible or degenerate construction: counts as failure
            }
        }
        const double rate = static_cast<double>(ok) / kSweepSeedsPerPoint;
        csv += std::to_string(n);
        csv += rep.feasible_at_n ? ",1," : ",0,";
        csv += gsa::detail::format_double(rate);
        csv += "\n";
        Json row;
        row["N"] = n;
        row["feasible"] = rep.feasible_at_n;
        row["construction_success_rate"] = rate;
        rows.push_back(std::move(row));
    }
    if (format == "csv")
        write_output(out_path, csv);
    else if (format == "json")
        write_output(out_path, rows.dump(2) + "\n");
    else
        throw gsa::InvalidInputError("--format must be csv or json");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relay-aided multi-way exchange: alignment design, feasibility "
                 "analysis, traffic synthesis and simulation"};
    app.require_subcommand(1);

    ScenarioFlags an_flags;
    std::string an_out;
    CLI::App* analyze = app.add_subcommand("analyze", "feasibility report (JSON)");
    add_scenario_flags(analyze, an_flags);
    analyze->add_option("--out", an_out, "write to file instead of stdout");

    std::string syn_m, syn_objective = "min-n", syn_out;
    CLI::App* synth = app.add_subcommand(
        "synthesize", "build a switch matrix from per-node stream counts");
    synth->add_option("--M", syn_m, "target row sums, comma list")->required();
    synth->add_option("--objective", syn_objective, "any | min-n");
    synth->add_option("--out", syn_out, "write to file instead of stdout");

    ScenarioFlags sim_scenario;
    SimFlags sim_flags;
    CLI::App* sim = app.add_subcommand("simulate", "noiseless gate + noisy sweep");
    add_scenario_flags(sim, sim_scenario);
    sim->add_option("--snr", sim_flags.snr, "SNR grid lo:hi:step in dB");
    sim->add_option("--trials", sim_flags.trials, "Monte Carlo trials per point");
    CLI::Option* seed_opt = sim->add_option("--seed", sim_flags.seed, "master seed");
    sim->add_option("--extend", sim_flags.extend, "symbol extension factor");
    sim->add_option("--format", sim_flags.format, "csv | json");
    sim->add_option("--out", sim_flags.out_path, "write to file instead of stdout");
    sim->add_option("--design-out", sim_flags.design_out,
                    "also write the design bundle JSON here");
    sim->add_option("--symbols", sim_flags.symbols, "gaussian | qam");
    sim->add_option("--qam-order", sim_flags.qam_order, "QAM order, power of 4");
    sim->add_flag("--no-relay-norm", sim_flags.no_relay_norm,
                  "transmit U s directly without relay power normalization");

    ScenarioFlags sweep_scenario;
    std::string sweep_n, sweep_format = "csv", sweep_out;
    std::uint64_t sweep_seed = 1;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "feasibility and construction success over a relay antenna range");
    add_scenario_flags(sweep, sweep_scenario, /*with_n=*/false);
    sweep->add_option("--N", sweep_n, "relay antenna range lo:hi")->required();
    sweep->add_option("--seed", sweep_seed, "master seed");
    sweep->add_option("--format", sweep_format, "csv | json");
    sweep->add_option("--out", sweep_out, "write to file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (analyze->parsed()) return run_analyze(an_flags, an_out);
        if (synth->parsed()) return run_synthesize(syn_m, syn_objective, syn_out);
        if (sim->parsed()) {
            sim_flags.seed_given = seed_opt->count() > 0;
            return run_simulate(sim_scenario, sim_flags);
        }
        if (sweep->parsed())
            return run_sweep(sweep_scenario, sweep_n, sweep_seed, sweep_format,
                             sweep_out);
    } catch (const gsa::InfeasibleAntennasError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const gsa::InfeasibleRequestError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const gsa::DegenerateChannelError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return kExitVerification;
    } catch (const gsa::SingularMatrixError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return kExitVerification;
    } catch (const gsa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
