#include <algorithm>
#include <limits>
#include <set>

#include <Eigen/Eigenvalues>

#include "cpsdiag/error.hpp"
#include "cpsdiag/residual_model.hpp"
#include "json_eigen.hpp"

namespace cpsdiag {

using nlohmann::json;
using detail::matrix_from_json;
using detail::matrix_to_json;
using detail::vector_from_json;
using detail::vector_to_json;

namespace {

// Distinct rows, counting stops once `limit` is reached.
std::size_t distinct_rows(const Eigen::MatrixXd& m, std::size_t limit) {
    std::set<std::vector<double>> seen;
    for (Eigen::Index r = 0; r < m.rows() && seen.size() < limit; ++r) {
        const Eigen::VectorXd row = m.row(r).transpose();
        seen.emplace(row.data(), row.data() + row.size());
    }
    return seen.size();
}

}  // namespace

LinearSubspaceModel fit_linear_subspace_model(const TimeSeriesFrame& nominal,
                                              const SubsystemSignalsMap& map,
                                              std::size_t window_len,
                                              std::size_t latent_dim_per_subsystem) {
    if (window_len == 0) throw ValidationError("window length must be positive");
    if (latent_dim_per_subsystem == 0) throw ValidationError("latent dimension must be positive");
    if (nominal.rows() < 10 * window_len)
        throw ValidationError("linear model: need at least " + std::to_string(10 * window_len) +
                              " nominal rows, got " + std::to_string(nominal.rows()));
    std::size_t min_signals = std::numeric_limits<std::size_t>::max();
    for (const auto& [sub, signals] : map.assignments()) min_signals = std::min(min_signals, signals.size());
    if (latent_dim_per_subsystem >= window_len * min_signals)
        throw ValidationError("linear model: latent dimension must be below window_len * min signal count (" +
                              std::to_string(window_len * min_signals) + ")");

    LinearSubspaceModel model;
    model.init_layout(nominal, map, window_len);
    model.latent_dim_ = latent_dim_per_subsystem;
    const Eigen::MatrixXd z = model.standardize(nominal.columns(model.signal_order()));
    for (std::size_t b = 0; b < model.blocks().size(); ++b) {
        const Eigen::MatrixXd windows = model.block_windows(z, b, 1);
        const std::size_t k = latent_dim_per_subsystem;
        if (distinct_rows(windows, k) < k)
            throw ValidationError("linear model: subsystem '" + model.blocks()[b].id +
                                  "' has fewer distinct windows than the latent dimension " +
                                  std::to_string(k));
        const Eigen::VectorXd mean = windows.colwise().mean().transpose();
        const Eigen::MatrixXd centered = windows.rowwise() - mean.transpose();
        const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(windows.rows());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success)
            throw NumericalError("linear model: eigendecomposition failed for '" + model.blocks()[b].id + "'");
        // Eigenvalues ascend; keep the trailing k eigenvectors, largest first.
        const Eigen::MatrixXd basis = eig.eigenvectors().rightCols(static_cast<Eigen::Index>(k)).rowwise().reverse();
        model.means_.push_back(mean);
        model.bases_.push_back(basis);
    }
    return model;
}

Eigen::VectorXd LinearSubspaceModel::reconstruct(std::size_t block, const Eigen::VectorXd& z) const {
    const Eigen::VectorXd centered = z - means_[block];
    return means_[block] + bases_[block] * (bases_[block].transpose() * centered);
}

json LinearSubspaceModel::to_json() const {
    json j = layout_to_json();
    j["kind"] = kind();
    j["latent_dim"] = latent_dim_;
    json blocks = json::array();
    for (std::size_t b = 0; b < bases_.size(); ++b)
        blocks.push_back({{"subsystem", this->blocks()[b].id},
                          {"mean", vector_to_json(means_[b])},
                          {"basis", matrix_to_json(bases_[b])}});
    j["blocks"] = std::move(blocks);
    return j;
}

LinearSubspaceModel LinearSubspaceModel::from_json(const json& j) {
    LinearSubspaceModel m;
    m.init_layout_from_json(j);
    m.latent_dim_ = j.at("latent_dim").get<std::size_t>();
    const auto& blocks = j.at("blocks");
    if (!blocks.is_array() || blocks.size() != m.blocks().size())
        throw ValidationError("model: block count does not match the signals map");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto d = static_cast<Eigen::Index>(m.window_len() * m.blocks()[b].count);
        if (blocks[b].at("subsystem").get<std::string>() != m.blocks()[b].id)
            throw ValidationError("model: block order does not match the signals map");
        m.means_.push_back(vector_from_json(blocks[b].at("mean"), d, "mean"));
        m.bases_.push_back(
            matrix_from_json(blocks[b].at("basis"), d, static_cast<Eigen::Index>(m.latent_dim_), "basis"));
    }
    return m;
}

}  // namespace cpsdiag
