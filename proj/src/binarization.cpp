#include "cpsdiag/binarization.hpp"

#include <algorithm>
#include <cmath>

#include "cpsdiag/error.hpp"
#include "cpsdiag/graph_io.hpp"
#include "cpsdiag/stats.hpp"

namespace cpsdiag {

using nlohmann::json;

BinarizationConfig BinarizationConfig::mean_plus_k_sigma(double k, std::size_t smoothing) {
    BinarizationConfig c;
    c.method = ThresholdMethod::mean_plus_k_sigma;
    c.k_sigma = k;
    c.smoothing_window = smoothing;
    c.validate();
    return c;
}

BinarizationConfig BinarizationConfig::at_percentile(double q, std::size_t smoothing) {
    BinarizationConfig c;
    c.method = ThresholdMethod::percentile;
    c.percentile = q;
    c.smoothing_window = smoothing;
    c.validate();
    return c;
}

void BinarizationConfig::validate() const {
    if (method == ThresholdMethod::mean_plus_k_sigma && !(k_sigma > 0.0 && std::isfinite(k_sigma)))
        throw ValidationError("k-sigma must be a positive number");
    if (method == ThresholdMethod::percentile && !(percentile > 0.0 && percentile < 100.0))
        throw ValidationError("percentile must lie strictly between 0 and 100");
    for (const auto& [sub, t] : thresholds)
        if (!(t >= 0.0 && std::isfinite(t)))
            throw ValidationError("threshold for '" + sub + "' must be finite and non-negative");
}

json binarization_to_json(const BinarizationConfig& cfg) {
    json j;
    if (cfg.method == ThresholdMethod::percentile) {
        j["method"] = "percentile";
        j["q"] = cfg.percentile;
    } else {
        j["method"] = "mean_plus_k_sigma";
        j["k"] = cfg.k_sigma;
    }
    j["smoothing_window"] = cfg.smoothing_window;
    j["thresholds"] = cfg.thresholds;
    return j;
}

BinarizationConfig binarization_from_json(const json& j) {
    try {
        BinarizationConfig c;
        const auto method = j.at("method").get<std::string>();
        if (method == "percentile") {
            c.method = ThresholdMethod::percentile;
            c.percentile = j.at("q").get<double>();
        } else if (method == "mean_plus_k_sigma") {
            c.method = ThresholdMethod::mean_plus_k_sigma;
            c.k_sigma = j.at("k").get<double>();
        } else {
            throw ValidationError("binarization: unknown method '" + method + "'");
        }
        c.smoothing_window = j.value("smoothing_window", std::size_t{0});
        if (j.contains("thresholds")) c.thresholds = j["thresholds"].get<std::map<SubsystemId, double>>();
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("binarization: ") + e.what());
    }
}

BinarizationConfig load_binarization(const std::filesystem::path& path) {
    return binarization_from_json(read_json_file(path));
}

double threshold_for(std::span<const double> residuals, const BinarizationConfig& cfg) {
    if (cfg.method == ThresholdMethod::percentile) return stats::percentile(residuals, cfg.percentile);
    return stats::mean(residuals) + cfg.k_sigma * stats::stddev(residuals);
}

namespace {

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
    return out;
}

void smooth_columns(Eigen::MatrixXd& m, std::size_t width) {
    if (width <= 1) return;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const auto sm = stats::moving_median(column(m, c), width);
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = sm[static_cast<std::size_t>(r)];
    }
}

// Thresholds in model block order; throws if any subsystem is missing.
Eigen::VectorXd ordered_thresholds(const ResidualModel& model, const BinarizationConfig& cfg) {
    if (!cfg.calibrated()) throw ValidationError("binarization config has no thresholds; run calibrate first");
    Eigen::VectorXd t(static_cast<Eigen::Index>(model.blocks().size()));
    for (std::size_t b = 0; b < model.blocks().size(); ++b) {
        const auto it = cfg.thresholds.find(model.blocks()[b].id);
        if (it == cfg.thresholds.end())
            throw ValidationError("no threshold for subsystem '" + model.blocks()[b].id + "'");
        t(static_cast<Eigen::Index>(b)) = it->second;
    }
    return t;
}

HealthStateVector to_health(const ResidualModel& model, std::int64_t t, const Eigen::VectorXd& residual,
                            const Eigen::VectorXd& thresholds) {
    HealthStateVector h;
    h.timestamp = t;
    for (std::size_t b = 0; b < model.blocks().size(); ++b) {
        const auto i = static_cast<Eigen::Index>(b);
        h.states[model.blocks()[b].id] = residual(i) > thresholds(i);
    }
    return h;
}

}  // namespace

BinarizationConfig calibrate_thresholds(const ResidualModel& model, const TimeSeriesFrame& heldout,
                                        BinarizationConfig cfg, Execution exec) {
    cfg.validate();
    heldout.validate();
    const std::size_t windows = heldout.rows() / model.window_len();
    if (windows < kMinCalibrationWindows)
        throw ValidationError("calibration needs at least " + std::to_string(kMinCalibrationWindows) +
                              " non-overlapping windows (" +
                              std::to_string(kMinCalibrationWindows * model.window_len()) +
                              " rows), got " + std::to_string(windows));
    auto series = residual_series(model, heldout, model.window_len(), exec);
    smooth_columns(series.per_subsystem, cfg.smoothing_window);
    cfg.thresholds.clear();
    for (std::size_t b = 0; b < model.blocks().size(); ++b)
        cfg.thresholds[model.blocks()[b].id] =
            threshold_for(column(series.per_subsystem, static_cast<Eigen::Index>(b)), cfg);
    return cfg;
}

HealthStateVector health_states(const ResidualModel& model, const BinarizationConfig& cfg,
                                const SubsystemSignalsMap& map, const TimeSeriesFrame& window) {
    if (!(map == model.signal_map())) throw ValidationError("signals map does not match the model");
    map.check_signals(window.signal_names);
    if (window.rows() != model.window_len())
        throw ValidationError("window has " + std::to_string(window.rows()) + " rows, model expects " +
                              std::to_string(model.window_len()));
    const Eigen::VectorXd thresholds = ordered_thresholds(model, cfg);
    const Eigen::VectorXd sig = model.signal_residuals(window.columns(model.signal_order()));
    return to_health(model, window.timestamps.back(), model.subsystem_residuals(sig), thresholds);
}

DetectionSeries detect_series(const ResidualModel& model, const BinarizationConfig& cfg,
                              const TimeSeriesFrame& frame, std::size_t stride, Execution exec) {
    const Eigen::VectorXd thresholds = ordered_thresholds(model, cfg);
    auto series = residual_series(model, frame, stride, exec);
    smooth_columns(series.per_subsystem, cfg.smoothing_window);
    DetectionSeries out;
    for (const auto& b : model.blocks()) out.subsystems.push_back(b.id);
    out.states.reserve(series.timestamps.size());
    for (std::size_t w = 0; w < series.timestamps.size(); ++w)
        out.states.push_back(to_health(model, series.timestamps[w],
                                       series.per_subsystem.row(static_cast<Eigen::Index>(w)).transpose(),
                                       thresholds));
    out.residuals = std::move(series.per_subsystem);
    return out;
}

SymptomMonitor::SymptomMonitor(const ResidualModel& model, BinarizationConfig cfg,
                               const std::vector<std::string>& columns, std::size_t stride)
    : model_(model), cfg_(std::move(cfg)), stride_(stride) {
    if (stride_ == 0) throw ValidationError("stride must be positive");
    model.signal_map().check_signals(columns);
    thresholds_ = ordered_thresholds(model_, cfg_);
    for (const auto& s : model.signal_order())
        column_of_.push_back(static_cast<std::size_t>(std::find(columns.begin(), columns.end(), s) - columns.begin()));
}

std::size_t SymptomMonitor::pending_rows() const {
    return emitted_ ? rows_seen_ - last_emit_row_ : rows_seen_;
}

std::optional<HealthStateVector> SymptomMonitor::push(std::int64_t timestamp, std::span<const double> row) {
    if (row.size() != column_of_.size())
        throw ValidationError("row has " + std::to_string(row.size()) + " fields, expected " +
                              std::to_string(column_of_.size()));
    std::vector<double> ordered(column_of_.size());
    for (std::size_t i = 0; i < column_of_.size(); ++i) ordered[i] = row[column_of_[i]];
    rows_.push_back(std::move(ordered));
    ++rows_seen_;
    const std::size_t L = model_.window_len();
    if (rows_.size() > L) rows_.pop_front();
    if (rows_seen_ < L || (rows_seen_ - L) % stride_ != 0) return std::nullopt;

    Eigen::MatrixXd window(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(column_of_.size()));
    for (std::size_t r = 0; r < L; ++r)
        for (std::size_t c = 0; c < column_of_.size(); ++c)
            window(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows_[r][c];
    history_.push_back(model_.subsystem_residuals(model_.signal_residuals(window)));
    const std::size_t width = std::max<std::size_t>(cfg_.smoothing_window, 1);
    if (history_.size() > width) history_.pop_front();

    Eigen::VectorXd smoothed = history_.back();
    if (width > 1) {
        std::vector<double> buf;
        for (Eigen::Index b = 0; b < smoothed.size(); ++b) {
            buf.clear();
            for (const auto& h : history_) buf.push_back(h(b));
            smoothed(b) = stats::median(buf);
        }
    }
    emitted_ = true;
    last_emit_row_ = rows_seen_;
    return to_health(model_, timestamp, smoothed, thresholds_);
}

}  // namespace cpsdiag
