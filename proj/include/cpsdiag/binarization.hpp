#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cpsdiag/causal_graph.hpp"
#include "cpsdiag/execution.hpp"
#include "cpsdiag/residual_model.hpp"

namespace cpsdiag {

enum class ThresholdMethod { mean_plus_k_sigma, percentile };

struct BinarizationConfig {
    ThresholdMethod method = ThresholdMethod::percentile;
    double k_sigma = 2.0;
    double percentile = 75.0;
    std::size_t smoothing_window = 0;  // 0 or 1: no smoothing
    std::map<SubsystemId, double> thresholds;

    static BinarizationConfig mean_plus_k_sigma(double k, std::size_t smoothing = 0);
    static BinarizationConfig at_percentile(double q, std::size_t smoothing = 0);

    // Method parameters only; thresholds are checked where they are used.
    void validate() const;
    bool calibrated() const { return !thresholds.empty(); }
};

inline constexpr std::size_t kMinCalibrationWindows = 30;

nlohmann::json binarization_to_json(const BinarizationConfig& cfg);
BinarizationConfig binarization_from_json(const nlohmann::json& j);
BinarizationConfig load_binarization(const std::filesystem::path& path);

// Threshold of one (already smoothed) residual series under cfg's method.
double threshold_for(std::span<const double> residuals, const BinarizationConfig& cfg);

// Thresholds from non-overlapping windows of held-out nominal data, which
// must not overlap the training data. Needs at least kMinCalibrationWindows.
BinarizationConfig calibrate_thresholds(const ResidualModel& model, const TimeSeriesFrame& heldout,
                                        BinarizationConfig cfg,
                                        Execution exec = Execution::parallel);

// Health states of a single window (rows == window_len). Smoothing needs a
// history, so it does not apply here; see detect_series and SymptomMonitor.
HealthStateVector health_states(const ResidualModel& model, const BinarizationConfig& cfg,
                                const SubsystemSignalsMap& map, const TimeSeriesFrame& window);

struct DetectionSeries {
    std::vector<SubsystemId> subsystems;  // column order of `residuals`
    Eigen::MatrixXd residuals;           // windows x subsystems, after smoothing
    std::vector<HealthStateVector> states;
};

// Sliding windows at `stride`, smoothed per subsystem, then thresholded.
DetectionSeries detect_series(const ResidualModel& model, const BinarizationConfig& cfg,
                              const TimeSeriesFrame& frame, std::size_t stride = 1,
                              Execution exec = Execution::parallel);

// Incremental equivalent of detect_series for row-at-a-time input.
class SymptomMonitor {
public:
    // `columns` names the fields of each pushed row.
    SymptomMonitor(const ResidualModel& model, BinarizationConfig cfg,
                   const std::vector<std::string>& columns, std::size_t stride = 1);

    // Returns the health state when the row completes a window.
    std::optional<HealthStateVector> push(std::int64_t timestamp, std::span<const double> row);

    std::size_t rows_seen() const { return rows_seen_; }
    // Rows received since the last emitted window (a trailing partial window).
    std::size_t pending_rows() const;

private:
    const ResidualModel& model_;
    BinarizationConfig cfg_;
    Eigen::VectorXd thresholds_;
    std::vector<std::size_t> column_of_;  // model signal index -> pushed column
    std::size_t stride_;
    std::deque<std::vector<double>> rows_;
    std::deque<Eigen::VectorXd> history_;  // recent raw subsystem residuals
    std::size_t rows_seen_ = 0;
    std::size_t last_emit_row_ = 0;
    bool emitted_ = false;
};

}  // namespace cpsdiag
