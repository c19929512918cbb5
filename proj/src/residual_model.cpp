#include "cpsdiag/residual_model.hpp"

#include <cmath>

#include "cpsdiag/error.hpp"
#include "cpsdiag/graph_io.hpp"
#include "json_eigen.hpp"

namespace cpsdiag {

using nlohmann::json;
using detail::vector_from_json;
using detail::vector_to_json;

void ResidualModel::init_layout(const TimeSeriesFrame& nominal, const SubsystemSignalsMap& map,
                                std::size_t window_len) {
    if (window_len == 0) throw ValidationError("window length must be positive");
    if (map.subsystem_count() == 0) throw ValidationError("signals map is empty");
    nominal.validate();
    map.check_signals(nominal.signal_names);
    window_len_ = window_len;
    map_ = map;
    signal_order_ = map.signal_order();
    blocks_.clear();
    std::size_t col = 0;
    for (const auto& [sub, signals] : map.assignments()) {
        blocks_.push_back({sub, col, signals.size()});
        col += signals.size();
    }
    const Eigen::MatrixXd data = nominal.columns(signal_order_);
    center_ = data.colwise().mean().transpose();
    scale_.resize(data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const double sd = std::sqrt((data.col(c).array() - center_(c)).square().mean());
        scale_(c) = sd > 1e-12 ? sd : 1.0;
    }
}

json ResidualModel::layout_to_json() const {
    return json{{"window_len", window_len_},
                {"map", signals_map_to_json(map_)},
                {"signal_center", vector_to_json(center_)},
                {"signal_scale", vector_to_json(scale_)}};
}

void ResidualModel::init_layout_from_json(const json& j) {
    for (const char* key : {"window_len", "map", "signal_center", "signal_scale"})
        if (!j.contains(key)) throw ValidationError(std::string("model: missing '") + key + "'");
    window_len_ = j["window_len"].get<std::size_t>();
    if (window_len_ == 0) throw ValidationError("model: window_len must be positive");
    map_ = signals_map_from_json(j["map"]);
    signal_order_ = map_.signal_order();
    blocks_.clear();
    std::size_t col = 0;
    for (const auto& [sub, signals] : map_.assignments()) {
        blocks_.push_back({sub, col, signals.size()});
        col += signals.size();
    }
    center_ = vector_from_json(j["signal_center"], -1, "signal_center");
    scale_ = vector_from_json(j["signal_scale"], -1, "signal_scale");
    if (static_cast<std::size_t>(center_.size()) != signal_order_.size() ||
        static_cast<std::size_t>(scale_.size()) != signal_order_.size())
        throw ValidationError("model: standardization size does not match signal count");
}

Eigen::MatrixXd ResidualModel::standardize(const Eigen::Ref<const Eigen::MatrixXd>& data) const {
    return (data.rowwise() - center_.transpose()).array().rowwise() / scale_.transpose().array();
}

Eigen::MatrixXd ResidualModel::block_windows(const Eigen::MatrixXd& standardized,
                                             std::size_t block, std::size_t stride) const {
    const auto& b = blocks_[block];
    const auto rows = static_cast<std::size_t>(standardized.rows());
    if (rows < window_len_) return Eigen::MatrixXd(0, static_cast<Eigen::Index>(window_len_ * b.count));
    const std::size_t n = (rows - window_len_) / stride + 1;
    const auto d = static_cast<Eigen::Index>(window_len_ * b.count);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    for (std::size_t w = 0; w < n; ++w)
        for (std::size_t t = 0; t < window_len_; ++t)
            for (std::size_t j = 0; j < b.count; ++j)
                out(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(t * b.count + j)) =
                    standardized(static_cast<Eigen::Index>(w * stride + t),
                                 static_cast<Eigen::Index>(b.first + j));
    return out;
}

Eigen::VectorXd ResidualModel::signal_residuals(const Eigen::Ref<const Eigen::MatrixXd>& window) const {
    if (static_cast<std::size_t>(window.rows()) != window_len_ ||
        static_cast<std::size_t>(window.cols()) != signal_order_.size())
        throw ValidationError("residuals: window must be " + std::to_string(window_len_) + " x " +
                              std::to_string(signal_order_.size()));
    const Eigen::MatrixXd z = standardize(window);
    Eigen::VectorXd out(static_cast<Eigen::Index>(signal_order_.size()));
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const auto& blk = blocks_[b];
        Eigen::VectorXd flat(static_cast<Eigen::Index>(window_len_ * blk.count));
        for (std::size_t t = 0; t < window_len_; ++t)
            for (std::size_t j = 0; j < blk.count; ++j)
                flat(static_cast<Eigen::Index>(t * blk.count + j)) =
                    z(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(blk.first + j));
        const Eigen::VectorXd err = reconstruct(b, flat) - flat;
        for (std::size_t j = 0; j < blk.count; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < window_len_; ++t) {
                const double e = err(static_cast<Eigen::Index>(t * blk.count + j));
                s += e * e;
            }
            out(static_cast<Eigen::Index>(blk.first + j)) = s / static_cast<double>(window_len_);
        }
    }
    return out;
}

Eigen::VectorXd ResidualModel::subsystem_residuals(const Eigen::VectorXd& per_signal) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(blocks_.size()));
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const auto& blk = blocks_[b];
        out(static_cast<Eigen::Index>(b)) =
            per_signal.segment(static_cast<Eigen::Index>(blk.first), static_cast<Eigen::Index>(blk.count))
                .mean();
    }
    return out;
}

std::unique_ptr<ResidualModel> model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ValidationError("model: missing 'kind'");
    const auto kind = j["kind"].get<std::string>();
    try {
        if (kind == "linear_subspace")
            return std::make_unique<LinearSubspaceModel>(LinearSubspaceModel::from_json(j));
        if (kind == "autoencoder")
            return std::make_unique<AutoencoderModel>(AutoencoderModel::from_json(j));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
    throw ValidationError("model: unknown kind '" + kind + "'");
}

std::unique_ptr<ResidualModel> load_model(const std::filesystem::path& path) {
    return model_from_json(read_json_file(path));
}

ResidualVector window_residuals(const ResidualModel& model, const TimeSeriesFrame& frame,
                                std::size_t first_row) {
    if (first_row + model.window_len() > frame.rows())
        throw ValidationError("residuals: frame has fewer rows than the window length");
    const Eigen::MatrixXd data = frame.columns(model.signal_order())
                                     .middleRows(static_cast<Eigen::Index>(first_row),
                                                 static_cast<Eigen::Index>(model.window_len()));
    const Eigen::VectorXd sig = model.signal_residuals(data);
    const Eigen::VectorXd sub = model.subsystem_residuals(sig);
    ResidualVector r;
    r.timestamp = frame.timestamps[first_row + model.window_len() - 1];
    for (std::size_t i = 0; i < model.signal_order().size(); ++i)
        r.per_signal[model.signal_order()[i]] = sig(static_cast<Eigen::Index>(i));
    for (std::size_t b = 0; b < model.blocks().size(); ++b)
        r.per_subsystem[model.blocks()[b].id] = sub(static_cast<Eigen::Index>(b));
    return r;
}

namespace {

ResidualSeries allocate_series(const ResidualModel& model, const TimeSeriesFrame& frame,
                               std::size_t stride, std::size_t& count) {
    if (stride == 0) throw ValidationError("residuals: stride must be positive");
    const std::size_t L = model.window_len();
    count = frame.rows() >= L ? (frame.rows() - L) / stride + 1 : 0;
    ResidualSeries s;
    s.timestamps.resize(count);
    for (std::size_t w = 0; w < count; ++w) s.timestamps[w] = frame.timestamps[w * stride + L - 1];
    s.per_signal.resize(static_cast<Eigen::Index>(count),
                        static_cast<Eigen::Index>(model.signal_order().size()));
    s.per_subsystem.resize(static_cast<Eigen::Index>(count),
                           static_cast<Eigen::Index>(model.blocks().size()));
    return s;
}

void fill_window(const ResidualModel& model, const Eigen::MatrixXd& data, std::size_t stride,
                 std::size_t w, ResidualSeries& s) {
    const auto row = static_cast<Eigen::Index>(w);
    const Eigen::VectorXd sig = model.signal_residuals(data.middleRows(
        static_cast<Eigen::Index>(w * stride), static_cast<Eigen::Index>(model.window_len())));
    s.per_signal.row(row) = sig.transpose();
    s.per_subsystem.row(row) = model.subsystem_residuals(sig).transpose();
}

}  // namespace

ResidualSeries residual_series_serial(const ResidualModel& model, const TimeSeriesFrame& frame,
                                      std::size_t stride) {
    std::size_t count = 0;
    auto s = allocate_series(model, frame, stride, count);
    const Eigen::MatrixXd data = frame.columns(model.signal_order());
    for (std::size_t w = 0; w < count; ++w) fill_window(model, data, stride, w, s);
    return s;
}

ResidualSeries residual_series_parallel(const ResidualModel& model, const TimeSeriesFrame& frame,
                                        std::size_t stride) {
    std::size_t count = 0;
    auto s = allocate_series(model, frame, stride, count);
    const Eigen::MatrixXd data = frame.columns(model.signal_order());
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t w = 0; w < n; ++w)
        fill_window(model, data, stride, static_cast<std::size_t>(w), s);
    return s;
}

ResidualSeries residual_series(const ResidualModel& model, const TimeSeriesFrame& frame,
                               std::size_t stride, Execution exec) {
    return exec == Execution::parallel ? residual_series_parallel(model, frame, stride)
                                       : residual_series_serial(model, frame, stride);
}

}  // namespace cpsdiag
