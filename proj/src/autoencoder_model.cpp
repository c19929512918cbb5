#include <cmath>
#include <random>
#include <sstream>

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

Eigen::MatrixXd xavier(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(rows + cols)));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
    return m;
}

}  // namespace

AutoencoderModel fit_autoencoder_model(const TimeSeriesFrame& nominal, const SubsystemSignalsMap& map,
                                       std::size_t window_len, std::size_t latent_dim_per_subsystem,
                                       const AutoencoderOptions& opts) {
    if (window_len == 0) throw ValidationError("window length must be positive");
    if (latent_dim_per_subsystem == 0) throw ValidationError("latent dimension must be positive");
    if (opts.epochs == 0) throw ValidationError("autoencoder: epochs must be at least 1");
    if (!(opts.learning_rate > 0.0) || !std::isfinite(opts.learning_rate))
        throw ValidationError("autoencoder: learning rate must be positive");
    if (opts.max_training_windows == 0) throw ValidationError("autoencoder: max_training_windows must be positive");
    if (nominal.rows() < 10 * window_len)
        throw ValidationError("autoencoder: need at least " + std::to_string(10 * window_len) +
                              " nominal rows, got " + std::to_string(nominal.rows()));

    AutoencoderModel model;
    model.init_layout(nominal, map, window_len);
    model.latent_dim_ = latent_dim_per_subsystem;
    const Eigen::MatrixXd z = model.standardize(nominal.columns(model.signal_order()));
    const auto k = static_cast<Eigen::Index>(latent_dim_per_subsystem);
    std::mt19937_64 rng(opts.seed);

    std::size_t stride = 1;
    {
        const std::size_t total = nominal.rows() - window_len + 1;
        if (total > opts.max_training_windows)
            stride = (total + opts.max_training_windows - 1) / opts.max_training_windows;
    }

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < model.blocks().size(); ++b) {
        const Eigen::MatrixXd x = model.block_windows(z, b, stride);
        const Eigen::Index n = x.rows();
        const Eigen::Index d = x.cols();
        AutoencoderModel::Layer layer;
        layer.enc_w = xavier(rng, k, d);
        layer.enc_b = Eigen::VectorXd::Zero(k);
        layer.dec_w = xavier(rng, d, k);
        layer.dec_b = x.colwise().mean().transpose();

        const double norm = 2.0 / static_cast<double>(n * d);
        double loss = 0.0;
        for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
            const Eigen::MatrixXd h =
                ((x * layer.enc_w.transpose()).rowwise() + layer.enc_b.transpose()).array().tanh().matrix();
            const Eigen::MatrixXd err = (h * layer.dec_w.transpose()).rowwise() + layer.dec_b.transpose() - x;
            loss = err.squaredNorm() / static_cast<double>(n * d);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "autoencoder diverged (non-finite loss at epoch " << epoch
                    << "); lower the learning rate (currently " << opts.learning_rate << ")";
                throw NumericalError(msg.str());
            }
            const Eigen::MatrixXd g_out = norm * err;
            const Eigen::MatrixXd g_hidden =
                ((g_out * layer.dec_w).array() * (1.0 - h.array().square())).matrix();
            layer.dec_w -= opts.learning_rate * (g_out.transpose() * h);
            layer.dec_b -= opts.learning_rate * g_out.colwise().sum().transpose();
            layer.enc_w -= opts.learning_rate * (g_hidden.transpose() * x);
            layer.enc_b -= opts.learning_rate * g_hidden.colwise().sum().transpose();
        }
        loss_sum += loss;
        model.layers_.push_back(std::move(layer));
    }
    model.final_loss_ = loss_sum / static_cast<double>(model.blocks().size());
    return model;
}

Eigen::VectorXd AutoencoderModel::reconstruct(std::size_t block, const Eigen::VectorXd& z) const {
    const auto& l = layers_[block];
    const Eigen::VectorXd h = (l.enc_w * z + l.enc_b).array().tanh().matrix();
    return l.dec_w * h + l.dec_b;
}

Eigen::VectorXd AutoencoderModel::encode(const Eigen::Ref<const Eigen::MatrixXd>& window) const {
    if (static_cast<std::size_t>(window.rows()) != window_len() ||
        static_cast<std::size_t>(window.cols()) != signal_order().size())
        throw ValidationError("encode: window must be " + std::to_string(window_len()) + " x " +
                              std::to_string(signal_order().size()));
    const Eigen::MatrixXd z = standardize(window);
    const auto k = static_cast<Eigen::Index>(latent_dim_);
    Eigen::VectorXd out(k * static_cast<Eigen::Index>(layers_.size()));
    for (std::size_t b = 0; b < blocks().size(); ++b) {
        const Eigen::MatrixXd flat = block_windows(z, b, 1);
        const auto& l = layers_[b];
        out.segment(static_cast<Eigen::Index>(b) * k, k) =
            (l.enc_w * flat.row(0).transpose() + l.enc_b).array().tanh().matrix();
    }
    return out;
}

json AutoencoderModel::to_json() const {
    json j = layout_to_json();
    j["kind"] = kind();
    j["latent_dim"] = latent_dim_;
    j["final_loss"] = final_loss_;
    json blocks = json::array();
    for (std::size_t b = 0; b < layers_.size(); ++b) {
        const auto& l = layers_[b];
        blocks.push_back({{"subsystem", this->blocks()[b].id},
                          {"enc_w", matrix_to_json(l.enc_w)},
                          {"enc_b", vector_to_json(l.enc_b)},
                          {"dec_w", matrix_to_json(l.dec_w)},
                          {"dec_b", vector_to_json(l.dec_b)}});
    }
    j["blocks"] = std::move(blocks);
    return j;
}

AutoencoderModel AutoencoderModel::from_json(const json& j) {
    AutoencoderModel m;
    m.init_layout_from_json(j);
    m.latent_dim_ = j.at("latent_dim").get<std::size_t>();
    if (m.latent_dim_ == 0) throw ValidationError("model: latent_dim must be positive");
    m.final_loss_ = j.value("final_loss", 0.0);
    const auto& blocks = j.at("blocks");
    if (!blocks.is_array() || blocks.size() != m.blocks().size())
        throw ValidationError("model: block count does not match the signals map");
    const auto k = static_cast<Eigen::Index>(m.latent_dim_);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& bj = blocks[b];
        if (bj.at("subsystem").get<std::string>() != m.blocks()[b].id)
            throw ValidationError("model: block order does not match the signals map");
        const auto d = static_cast<Eigen::Index>(m.window_len() * m.blocks()[b].count);
        Layer l;
        l.enc_w = matrix_from_json(bj.at("enc_w"), k, d, "enc_w");
        l.enc_b = vector_from_json(bj.at("enc_b"), k, "enc_b");
        l.dec_w = matrix_from_json(bj.at("dec_w"), d, k, "dec_w");
        l.dec_b = vector_from_json(bj.at("dec_b"), d, "dec_b");
        m.layers_.push_back(std::move(l));
    }
    return m;
}

}  // namespace cpsdiag
