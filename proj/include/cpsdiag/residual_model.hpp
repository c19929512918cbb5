#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cpsdiag/execution.hpp"
#include "cpsdiag/telemetry.hpp"

namespace cpsdiag {

struct ResidualVector {
    std::int64_t timestamp = 0;  // time index of the window's last row
    std::map<std::string, double> per_signal;
    std::map<SubsystemId, double> per_subsystem;
};

// Residual series over a frame: one row per window.
struct ResidualSeries {
    std::vector<std::int64_t> timestamps;
    Eigen::MatrixXd per_signal;     // windows x signals (model signal order)
    Eigen::MatrixXd per_subsystem;  // windows x subsystems (map order)
};

// Contiguous run of columns (in model signal order) owned by one subsystem.
struct SubsystemBlock {
    SubsystemId id;
    std::size_t first = 0;
    std::size_t count = 0;
};

// Reconstruction model producing per-signal window residuals. Signals are
// standardized with training statistics, each subsystem is reconstructed
// independently from its flattened (time-major) window, and the residual of a
// signal is the mean squared reconstruction error of its entries.
class ResidualModel {
public:
    virtual ~ResidualModel() = default;

    std::size_t window_len() const { return window_len_; }
    const SubsystemSignalsMap& signal_map() const { return map_; }
    const std::vector<std::string>& signal_order() const { return signal_order_; }
    const std::vector<SubsystemBlock>& blocks() const { return blocks_; }

    // `window` holds window_len rows in signal_order() column order.
    Eigen::VectorXd signal_residuals(const Eigen::Ref<const Eigen::MatrixXd>& window) const;
    // Mean of member signal residuals, in blocks() order.
    Eigen::VectorXd subsystem_residuals(const Eigen::VectorXd& per_signal) const;

    virtual std::string kind() const = 0;
    virtual nlohmann::json to_json() const = 0;

protected:
    ResidualModel() = default;
    // Sets up the layout and fits the standardization on `nominal`.
    void init_layout(const TimeSeriesFrame& nominal, const SubsystemSignalsMap& map,
                     std::size_t window_len);
    void init_layout_from_json(const nlohmann::json& j);
    nlohmann::json layout_to_json() const;

    // Standardized, flattened windows of one block: rows are windows taken at
    // the given stride over `data` (columns in signal order).
    Eigen::MatrixXd block_windows(const Eigen::MatrixXd& standardized, std::size_t block,
                                  std::size_t stride) const;
    Eigen::MatrixXd standardize(const Eigen::Ref<const Eigen::MatrixXd>& data) const;

    // Reconstruction of one flattened, standardized block window.
    virtual Eigen::VectorXd reconstruct(std::size_t block, const Eigen::VectorXd& z) const = 0;

private:
    std::size_t window_len_ = 0;
    SubsystemSignalsMap map_;
    std::vector<std::string> signal_order_;
    std::vector<SubsystemBlock> blocks_;
    Eigen::VectorXd center_, scale_;
};

// Best rank-k linear subspace per subsystem (principal directions of
// mean-centered flattened windows).
class LinearSubspaceModel final : public ResidualModel {
public:
    std::size_t latent_dim() const { return latent_dim_; }
    std::string kind() const override { return "linear_subspace"; }
    nlohmann::json to_json() const override;
    static LinearSubspaceModel from_json(const nlohmann::json& j);

    friend LinearSubspaceModel fit_linear_subspace_model(const TimeSeriesFrame&,
                                                         const SubsystemSignalsMap&, std::size_t,
                                                         std::size_t);

protected:
    Eigen::VectorXd reconstruct(std::size_t block, const Eigen::VectorXd& z) const override;

private:
    std::size_t latent_dim_ = 0;
    std::vector<Eigen::VectorXd> means_;
    std::vector<Eigen::MatrixXd> bases_;  // D x k, orthonormal columns
};

LinearSubspaceModel fit_linear_subspace_model(const TimeSeriesFrame& nominal,
                                              const SubsystemSignalsMap& map,
                                              std::size_t window_len,
                                              std::size_t latent_dim_per_subsystem);

struct AutoencoderOptions {
    std::size_t epochs = 300;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    // Training windows are subsampled with a uniform stride to at most this many.
    std::size_t max_training_windows = 512;
};

// One tanh hidden layer per subsystem (its latent block); the blocks together
// form the composite latent space. Trained by full-batch gradient descent.
class AutoencoderModel final : public ResidualModel {
public:
    std::size_t latent_dim() const { return latent_dim_; }
    double final_loss() const { return final_loss_; }
    std::string kind() const override { return "autoencoder"; }
    nlohmann::json to_json() const override;
    static AutoencoderModel from_json(const nlohmann::json& j);

    // Concatenated latent codes of all subsystems for one window.
    Eigen::VectorXd encode(const Eigen::Ref<const Eigen::MatrixXd>& window) const;

    friend AutoencoderModel fit_autoencoder_model(const TimeSeriesFrame&, const SubsystemSignalsMap&,
                                                  std::size_t, std::size_t,
                                                  const AutoencoderOptions&);

protected:
    Eigen::VectorXd reconstruct(std::size_t block, const Eigen::VectorXd& z) const override;

private:
    struct Layer {
        Eigen::MatrixXd enc_w;  // k x D
        Eigen::VectorXd enc_b;
        Eigen::MatrixXd dec_w;  // D x k
        Eigen::VectorXd dec_b;
    };
    std::size_t latent_dim_ = 0;
    double final_loss_ = 0.0;
    std::vector<Layer> layers_;
};

AutoencoderModel fit_autoencoder_model(const TimeSeriesFrame& nominal,
                                       const SubsystemSignalsMap& map, std::size_t window_len,
                                       std::size_t latent_dim_per_subsystem,
                                       const AutoencoderOptions& opts);

std::unique_ptr<ResidualModel> model_from_json(const nlohmann::json& j);
std::unique_ptr<ResidualModel> load_model(const std::filesystem::path& path);

// Residuals of the window starting at `first_row` of `frame`.
ResidualVector window_residuals(const ResidualModel& model, const TimeSeriesFrame& frame,
                                std::size_t first_row = 0);

// Residuals of every window [i, i + window_len) for i = 0, stride, 2*stride, ...
ResidualSeries residual_series_serial(const ResidualModel& model, const TimeSeriesFrame& frame,
                                      std::size_t stride);
ResidualSeries residual_series_parallel(const ResidualModel& model, const TimeSeriesFrame& frame,
                                        std::size_t stride);
ResidualSeries residual_series(const ResidualModel& model, const TimeSeriesFrame& frame,
                               std::size_t stride, Execution exec = Execution::parallel);

}  // namespace cpsdiag
