// cpsdiag: command-line front end for the diagnosis pipeline.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cpsdiag/binarization.hpp"
#include "cpsdiag/diagnosis.hpp"
#include "cpsdiag/error.hpp"
#include "cpsdiag/graph_io.hpp"
#include "cpsdiag/harness.hpp"
#include "cpsdiag/ingest.hpp"
#include "cpsdiag/residual_model.hpp"
#include "cpsdiag/simulator.hpp"
#include "cpsdiag/telemetry.hpp"
#include "cpsdiag/trial_io.hpp"

using namespace cpsdiag;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Writes to `path`, or to stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
    } else {
        write_text_file(path, text);
    }
}

std::vector<double> parse_thetas(const std::string& text) {
    if (text.empty()) return default_thetas();
    std::vector<double> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw ValidationError("thetas: cannot parse '" + field + "'");
        }
    }
    return out;
}

struct Common {
    std::string weights;
    double theta = 0.9;
    std::string preset;
    CLI::Option* weights_opt = nullptr;
    CLI::Option* theta_opt = nullptr;

    void add(CLI::App* app) {
        weights_opt = app->add_option("--weights", weights, "criterion weights w1,w2,w3,w4 (default equal)");
        theta_opt = app->add_option("--theta", theta, "relative selection threshold in [0,1]")->capture_default_str();
        app->add_option("--preset", preset, "named parameter preset (swat)");
    }
    std::optional<Preset> get_preset() const {
        if (preset.empty()) return std::nullopt;
        return preset_by_name(preset);
    }
    CriterionWeights resolved_weights() const {
        if (weights_opt->count()) return CriterionWeights::parse(weights);
        if (auto p = get_preset()) return p->weights;
        return CriterionWeights::equal();
    }
    double resolved_theta() const {
        if (theta_opt->count()) return theta;
        if (auto p = get_preset()) return p->theta;
        return theta;
    }
};

struct Threshold {
    std::string method = "percentile";
    double percentile = 75.0;
    double k_sigma = 2.0;
    std::size_t smooth = 0;
    CLI::Option* method_opt = nullptr;
    CLI::Option* percentile_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* smooth_opt = nullptr;

    void add(CLI::App* app) {
        method_opt = app->add_option("--threshold-method", method, "percentile or mean_plus_k_sigma")
                         ->capture_default_str();
        percentile_opt = app->add_option("--percentile", percentile, "percentile q in (0,100)")->capture_default_str();
        k_opt = app->add_option("--k-sigma", k_sigma, "k for mean + k * std")->capture_default_str();
        smooth_opt = app->add_option("--smooth", smooth, "moving-median width (0 = none)")->capture_default_str();
    }
    BinarizationConfig resolve(const std::optional<Preset>& preset) const {
        BinarizationConfig c = preset ? preset->binarization : BinarizationConfig{};
        const bool explicit_method = method_opt->count() > 0;
        if (explicit_method || !preset) {
            if (method == "percentile")
                c.method = ThresholdMethod::percentile;
            else if (method == "mean_plus_k_sigma")
                c.method = ThresholdMethod::mean_plus_k_sigma;
            else
                throw ValidationError("--threshold-method must be 'percentile' or 'mean_plus_k_sigma'");
        }
        if (percentile_opt->count() || !preset) c.percentile = percentile;
        if (k_opt->count() || !preset) c.k_sigma = k_sigma;
        if (smooth_opt->count() || !preset) c.smoothing_window = smooth;
        c.thresholds.clear();
        c.validate();
        return c;
    }
};

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::size_t nodes = 0;
    std::size_t min_nodes = 5, max_nodes = 50;
    double density = 0.0;
    bool cycles = false;
    bool sinks = false;
    double scale = 0.0;
    double noise = -1.0;
    std::string entries = "off_diagonal";
    std::uint64_t seed = 0;
    std::string out;
};

TrialConfig trial_config_from(const SimulateArgs& a) {
    TrialConfig c;
    if (a.nodes > 0) {
        c.min_nodes = c.max_nodes = a.nodes;
    } else {
        c.min_nodes = a.min_nodes;
        c.max_nodes = a.max_nodes;
    }
    if (a.density > 0.0) c.min_density = c.max_density = a.density;
    c.allow_cycles = a.cycles;
    c.fault_on_sinks = a.sinks;
    if (a.scale > 0.0) c.min_scale = c.max_scale = a.scale;
    if (a.noise >= 0.0) c.min_noise = c.max_noise = a.noise;
    c.fault_entries = fault_entries_from_string(a.entries);
    return c;
}

void add_trial_options(CLI::App* app, SimulateArgs& a) {
    app->add_option("--nodes", a.nodes, "exact node count (overrides --min-nodes/--max-nodes)");
    app->add_option("--min-nodes", a.min_nodes, "smallest sampled node count")->capture_default_str();
    app->add_option("--max-nodes", a.max_nodes, "largest sampled node count")->capture_default_str();
    app->add_option("--density", a.density, "exact edge density (default: sampled from [0.04, 0.12])");
    app->add_flag("--cycles", a.cycles, "allow cyclic graphs");
    app->add_flag("--fault-on-sinks", a.sinks, "allow the fault on nodes without successors");
    app->add_option("--scale", a.scale, "exact fault scale (default: sampled from [3, 10])");
    app->add_option("--noise", a.noise, "exact observation noise std (default: sampled from [0.01, 0.02])");
    app->add_option("--fault-entries", a.entries, "all_nonzero, off_diagonal or diagonal")->capture_default_str();
    app->add_option("--seed", a.seed, "random seed")->capture_default_str();
}

int cmd_simulate(const SimulateArgs& a) {
    const auto cfg = trial_config_from(a);
    const auto d = make_trial(cfg, a.seed);
    write_trial(a.out, d);
    spdlog::info("wrote trial to {} ({} nodes, {} edges, fault on {})", a.out, d.graph.size(), d.graph.edge_count(),
                 d.fault.target);
    return 0;
}

// ---- fit / calibrate / detect -------------------------------------------------

struct FitArgs {
    std::string trial, train, map, out;
    std::size_t window = 32;
    std::size_t latent = 12;
    std::string type = "linear";
    std::size_t epochs = 300;
    double lr = 0.05;
    std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a) {
    const fs::path train = a.train.empty() ? fs::path(a.trial) / "train.csv" : fs::path(a.train);
    const fs::path map_path = a.map.empty() ? fs::path(a.trial) / "map.json" : fs::path(a.map);
    if (a.trial.empty() && (a.train.empty() || a.map.empty()))
        throw ValidationError("fit needs --trial or both --train and --map");
    const auto frame = read_csv(train);
    const auto map = load_signals_map(map_path);
    json model;
    if (a.type == "linear") {
        model = fit_linear_subspace_model(frame, map, a.window, a.latent).to_json();
    } else if (a.type == "autoencoder") {
        AutoencoderOptions o;
        o.epochs = a.epochs;
        o.learning_rate = a.lr;
        o.seed = a.seed;
        const auto m = fit_autoencoder_model(frame, map, a.window, a.latent, o);
        spdlog::info("autoencoder final loss {}", m.final_loss());
        model = m.to_json();
    } else {
        throw ValidationError("--model-type must be 'linear' or 'autoencoder'");
    }
    emit(a.out, model.dump() + "\n");
    return 0;
}

struct CalibrateArgs {
    std::string model, data, trial, out;
    Threshold threshold;
    std::string preset;
};

int cmd_calibrate(const CalibrateArgs& a) {
    if (a.data.empty() && a.trial.empty()) throw ValidationError("calibrate needs --data or --trial");
    const auto model = load_model(a.model);
    const fs::path data = a.data.empty() ? fs::path(a.trial) / "calibration.csv" : fs::path(a.data);
    std::optional<Preset> preset;
    if (!a.preset.empty()) preset = preset_by_name(a.preset);
    const auto cfg = calibrate_thresholds(*model, read_csv(data), a.threshold.resolve(preset));
    emit(a.out, binarization_to_json(cfg).dump(2) + "\n");
    return 0;
}

struct DetectArgs {
    std::string model, config, data, trial, out;
    std::size_t stride = 1;
};

int cmd_detect(const DetectArgs& a) {
    if (a.data.empty() && a.trial.empty()) throw ValidationError("detect needs --data or --trial");
    const auto model = load_model(a.model);
    const auto cfg = load_binarization(a.config);
    const fs::path data = a.data.empty() ? fs::path(a.trial) / "test.csv" : fs::path(a.data);
    const auto det = detect_series(*model, cfg, read_csv(data), a.stride);
    std::string text;
    for (const auto& h : det.states) text += health_to_json(h).dump() + "\n";
    emit(a.out, text);
    return 0;
}

// ---- diagnose / sweep ---------------------------------------------------------

struct DiagnoseArgs {
    std::string graph, health, dot, out;
    Common common;
};

HealthStateVector load_health(const std::string& path, const CausalGraph& g) {
    json j = read_json_file(path);
    // An empty file or {} means no symptoms at all.
    if (j.is_null() || (j.is_object() && j.empty())) {
        HealthStateVector h;
        for (const auto& n : g.nodes()) h.states[n] = false;
        return h;
    }
    return health_from_json(j);
}

int cmd_diagnose(const DiagnoseArgs& a) {
    const auto g = load_graph(a.graph);
    const auto h = load_health(a.health, g);
    const auto r = diagnose(g, h, a.common.resolved_weights(), a.common.resolved_theta());
    if (!a.dot.empty()) write_text_file(a.dot, to_dot(g, h.symptomatic(), r.root_causes));
    emit(a.out, diagnosis_to_json(r).dump(2) + "\n");
    return 0;
}

struct SweepArgs {
    std::string graph, health, thetas, out, scenario;
    Common common;
};

int cmd_sweep(const SweepArgs& a) {
    CausalGraph g;
    HealthStateVector h;
    if (!a.scenario.empty()) {
        const auto& s = canonical_scenario(a.scenario);
        g = s.graph;
        h = s.health;
    } else {
        if (a.graph.empty() || a.health.empty()) throw ValidationError("sweep needs --scenario or --graph and --health");
        g = load_graph(a.graph);
        h = load_health(a.health, g);
    }
    const auto thetas = parse_thetas(a.thetas);
    const auto s = theta_sweep(g, h, a.common.resolved_weights(), thetas);
    for (const auto& w : s.warnings) spdlog::warn("{}", w);
    emit(a.out, sweep_to_csv(s));
    return 0;
}

// ---- pipeline -----------------------------------------------------------------

struct PipelineArgs {
    std::string graph, model, config, input = "-";
    std::size_t stride = 1;
    bool group = false;
    Common common;
};

int cmd_pipeline(const PipelineArgs& a) {
    const auto g = load_graph(a.graph);
    const auto model = load_model(a.model);
    const auto cfg = load_binarization(a.config);
    model->signal_map().check_covers(g);
    const auto w = a.common.resolved_weights();
    const double theta = a.common.resolved_theta();

    std::ifstream file;
    std::istream* in = &std::cin;
    std::string source = "<stdin>";
    if (a.input != "-") {
        file.open(a.input);
        if (!file) throw Error("cannot open '" + a.input + "'");
        in = &file;
        source = a.input;
    }

    std::size_t windows = 0, symptomatic = 0, incidents = 0;
    std::vector<HealthStateVector> open_incident;
    auto close_incident = [&] {
        if (open_incident.empty()) return;
        const auto symptoms = majority_symptoms(open_incident);
        HealthStateVector h;
        h.timestamp = open_incident.front().timestamp;
        for (const auto& n : g.nodes()) h.states[n] = symptoms.count(n) > 0;
        json line = {{"incident",
                      {{"start", open_incident.front().timestamp},
                       {"end", open_incident.back().timestamp},
                       {"windows", open_incident.size()},
                       {"symptoms", symptoms}}}};
        line["incident"]["diagnosis"] = diagnosis_to_json(diagnose(g, h, w, theta));
        std::cout << line.dump() << "\n";
        ++incidents;
        open_incident.clear();
    };

    int status = 0;
    std::string error;
    std::optional<SymptomMonitor> monitor;
    CsvStreamReader reader(*in, source);
    try {
        monitor.emplace(*model, cfg, reader.signal_names(), a.stride);
        std::int64_t t = 0;
        std::vector<double> row;
        while (reader.next(t, row)) {
            auto h = monitor->push(t, row);
            if (!h) continue;
            ++windows;
            json line = health_to_json(*h);
            const bool any = !h->symptomatic().empty();
            if (any) {
                ++symptomatic;
                if (!a.group) line["diagnosis"] = diagnosis_to_json(diagnose(g, *h, w, theta));
            }
            std::cout << line.dump() << "\n";
            if (a.group) {
                if (any)
                    open_incident.push_back(*h);
                else
                    close_incident();
            }
        }
        if (a.group) close_incident();
    } catch (const std::exception& e) {
        error = e.what();
        status = 1;
    }
    json summary = {{"rows", monitor ? monitor->rows_seen() : 0},
                    {"windows", windows},
                    {"symptomatic_windows", symptomatic},
                    {"dropped_partial_windows", monitor && monitor->pending_rows() > 0 ? 1 : 0},
                    {"dropped_rows", monitor ? monitor->pending_rows() : 0}};
    if (a.group) summary["incidents"] = incidents;
    if (status != 0) summary["error"] = error;
    std::cout << json{{"summary", summary}}.dump() << "\n";
    std::cout.flush();
    if (monitor && monitor->pending_rows() > 0)
        spdlog::warn("dropped {} trailing rows that did not complete a window", monitor->pending_rows());
    if (status != 0) spdlog::error("{}", error);
    return status;
}

// ---- experiments ----------------------------------------------------------------

struct Exp1Args {
    std::string thetas, out;
    Common common;
};

int cmd_exp1(const Exp1Args& a) {
    const auto thetas = parse_thetas(a.thetas);
    const auto report = run_experiment1(a.common.resolved_weights(), thetas);
    for (const auto& sc : report)
        for (const auto& w : sc["sweep"]["warnings"]) spdlog::warn("{}: {}", sc["scenario"].get<std::string>(), w.get<std::string>());
    emit(a.out, report.dump(2) + "\n");
    return 0;
}

struct Exp2Args {
    std::size_t trials = 100;
    SimulateArgs trial;
    std::size_t window = 32, latent = 12;
    double percentile = 75.0;
    std::string out;
    Common common;
};

int cmd_exp2(const Exp2Args& a) {
    Experiment2Config c;
    c.n_trials = a.trials;
    c.trial = trial_config_from(a.trial);
    c.theta = a.common.resolved_theta();
    c.weights = a.common.resolved_weights();
    c.window_len = a.window;
    c.latent_dim = a.latent;
    c.percentile = a.percentile;
    c.seed = a.trial.seed;
    const auto r = run_experiment2(c);
    for (const auto& t : r.trials)
        if (!t.completed) spdlog::warn("trial {} failed: {}", t.index, t.error);
    std::cerr << r.summary() << "\n";
    emit(a.out, experiment2_to_json(r).dump(2) + "\n");
    return 0;
}

// ---- ingest -----------------------------------------------------------------------

struct IngestArgs {
    std::string telemetry, attacks, graph, map, nominal, pattern = kDefaultStagePattern, format = "csv", out;
    std::size_t window = 32, latent = 12;
    Common common;
    Threshold threshold;
};

int cmd_ingest(const IngestArgs& a) {
    const auto g = load_graph(a.graph);
    const auto nominal = read_csv(a.nominal);
    const auto map = a.map.empty() ? auto_map_signals(nominal.signal_names, a.pattern) : load_signals_map(a.map);
    const auto run = load_annotated_run(a.telemetry, a.attacks, map, g);
    // The first half of the nominal run trains the model, the rest calibrates it.
    const std::size_t half = nominal.rows() / 2;
    const auto model = fit_linear_subspace_model(nominal.slice_rows(0, half), map, a.window, a.latent);
    const auto bin = calibrate_thresholds(model, nominal.slice_rows(half, nominal.rows() - half),
                                          a.threshold.resolve(a.common.get_preset()));
    const auto rows = evaluate_run(run, model, bin, g, a.common.resolved_weights(), a.common.resolved_theta());
    if (a.format == "csv")
        emit(a.out, evaluation_to_csv(rows));
    else if (a.format == "json")
        emit(a.out, evaluation_to_json(rows).dump(2) + "\n");
    else
        throw ValidationError("--format must be 'csv' or 'json'");
    return 0;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("cpsdiag");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("CPSDIAG_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off")
            spdlog::warn("CPSDIAG_LOG='{}' is not a log level; using warn", env);
        else
            spdlog::set_level(level);
    }
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Root-cause diagnosis for cyber-physical systems"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic trial dataset directory");
    add_trial_options(simulate, sim);
    simulate->add_option("--out", sim.out, "output directory")->required();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit a residual model on nominal telemetry");
    fit_cmd->add_option("--trial", fit.trial, "trial directory (uses train.csv and map.json)");
    fit_cmd->add_option("--train", fit.train, "nominal training CSV");
    fit_cmd->add_option("--map", fit.map, "subsystem-signals map JSON");
    fit_cmd->add_option("--window", fit.window, "window length")->capture_default_str();
    fit_cmd->add_option("--latent", fit.latent, "latent dimension per subsystem")->capture_default_str();
    fit_cmd->add_option("--model-type", fit.type, "linear or autoencoder")->capture_default_str();
    fit_cmd->add_option("--epochs", fit.epochs, "autoencoder epochs")->capture_default_str();
    fit_cmd->add_option("--learning-rate", fit.lr, "autoencoder learning rate")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed, "autoencoder seed")->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "model JSON (default stdout)");

    CalibrateArgs cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "calibrate residual thresholds on held-out nominal data");
    cal_cmd->add_option("--model", cal.model, "model JSON")->required();
    cal_cmd->add_option("--data", cal.data, "held-out nominal CSV");
    cal_cmd->add_option("--trial", cal.trial, "trial directory (uses calibration.csv)");
    cal_cmd->add_option("--preset", cal.preset, "named parameter preset (swat)");
    cal.threshold.add(cal_cmd);
    cal_cmd->add_option("--out", cal.out, "binarization config JSON (default stdout)");

    DetectArgs det;
    auto* det_cmd = app.add_subcommand("detect", "emit per-window health states as JSON lines");
    det_cmd->add_option("--model", det.model, "model JSON")->required();
    det_cmd->add_option("--config", det.config, "calibrated binarization config JSON")->required();
    det_cmd->add_option("--data", det.data, "telemetry CSV");
    det_cmd->add_option("--trial", det.trial, "trial directory (uses test.csv)");
    det_cmd->add_option("--stride", det.stride, "window stride")->capture_default_str();
    det_cmd->add_option("--out", det.out, "output file (default stdout)");

    DiagnoseArgs dia;
    auto* dia_cmd = app.add_subcommand("diagnose", "diagnose root causes for one health-state vector");
    dia_cmd->add_option("--graph", dia.graph, "causal graph JSON")->required();
    dia_cmd->add_option("--health", dia.health, "health-state JSON")->required();
    dia_cmd->add_option("--dot", dia.dot, "also write the annotated graph in DOT format");
    dia_cmd->add_option("--out", dia.out, "output file (default stdout)");
    dia.common.add(dia_cmd);

    PipelineArgs pipe;
    auto* pipe_cmd = app.add_subcommand("pipeline", "stream telemetry through detection and diagnosis");
    pipe_cmd->add_option("--graph", pipe.graph, "causal graph JSON")->required();
    pipe_cmd->add_option("--model", pipe.model, "model JSON")->required();
    pipe_cmd->add_option("--config", pipe.config, "calibrated binarization config JSON")->required();
    pipe_cmd->add_option("--input", pipe.input, "telemetry CSV ('-' for stdin)")->capture_default_str();
    pipe_cmd->add_option("--stride", pipe.stride, "window stride")->capture_default_str();
    pipe_cmd->add_flag("--group-incidents", pipe.group, "diagnose runs of symptomatic windows as one incident");
    pipe.common.add(pipe_cmd);

    SweepArgs sw;
    auto* sw_cmd = app.add_subcommand("sweep", "theta sensitivity table as CSV");
    sw_cmd->add_option("--graph", sw.graph, "causal graph JSON");
    sw_cmd->add_option("--health", sw.health, "health-state JSON");
    sw_cmd->add_option("--scenario", sw.scenario, "built-in scenario name instead of --graph/--health");
    sw_cmd->add_option("--thetas", sw.thetas, "descending comma-separated thetas (default 1.0 .. 0.0 by 0.1)");
    sw_cmd->add_option("--out", sw.out, "output file (default stdout)");
    sw.common.add(sw_cmd);

    Exp1Args e1;
    auto* e1_cmd = app.add_subcommand("exp1", "theta sweeps over the canonical scenarios");
    e1_cmd->add_option("--thetas", e1.thetas, "descending comma-separated thetas");
    e1_cmd->add_option("--out", e1.out, "report JSON (default stdout)");
    e1.common.add(e1_cmd);

    Exp2Args e2;
    auto* e2_cmd = app.add_subcommand("exp2", "seeded synthetic trial study with outcome categories");
    e2_cmd->add_option("--trials", e2.trials, "number of trials")->capture_default_str();
    add_trial_options(e2_cmd, e2.trial);
    e2_cmd->add_option("--window", e2.window, "window length")->capture_default_str();
    e2_cmd->add_option("--latent", e2.latent, "latent dimension per subsystem")->capture_default_str();
    e2_cmd->add_option("--percentile", e2.percentile, "threshold percentile")->capture_default_str();
    e2_cmd->add_option("--out", e2.out, "report JSON (default stdout)");
    e2.common.add(e2_cmd);

    IngestArgs ing;
    auto* ing_cmd = app.add_subcommand("ingest", "evaluate an annotated run against its attack list");
    ing_cmd->add_option("--telemetry", ing.telemetry, "telemetry CSV containing the attacks")->required();
    ing_cmd->add_option("--attacks", ing.attacks, "attack annotation JSON")->required();
    ing_cmd->add_option("--graph", ing.graph, "causal graph JSON")->required();
    ing_cmd->add_option("--nominal", ing.nominal, "attack-free CSV (first half trains, second half calibrates)")
        ->required();
    ing_cmd->add_option("--map", ing.map, "subsystem-signals map JSON (default: derive from signal names)");
    ing_cmd->add_option("--pattern", ing.pattern, "stage-code regex with one capture group")->capture_default_str();
    ing_cmd->add_option("--window", ing.window, "window length")->capture_default_str();
    ing_cmd->add_option("--latent", ing.latent, "latent dimension per subsystem")->capture_default_str();
    ing_cmd->add_option("--format", ing.format, "csv or json")->capture_default_str();
    ing_cmd->add_option("--out", ing.out, "output file (default stdout)");
    ing.common.add(ing_cmd);
    ing.threshold.add(ing_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*fit_cmd) return cmd_fit(fit);
        if (*cal_cmd) return cmd_calibrate(cal);
        if (*det_cmd) return cmd_detect(det);
        if (*dia_cmd) return cmd_diagnose(dia);
        if (*pipe_cmd) return cmd_pipeline(pipe);
        if (*sw_cmd) return cmd_sweep(sw);
        if (*e1_cmd) return cmd_exp1(e1);
        if (*e2_cmd) return cmd_exp2(e2);
        if (*ing_cmd) return cmd_ingest(ing);
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
