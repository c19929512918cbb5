#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cpsdiag/error.hpp"

namespace cpsdiag::detail {

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index expected,
                                        const std::string& what) {
    if (!j.is_array() || (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected))
        throw ValidationError("model: '" + what + "' has the wrong size");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                                        const std::string& what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw ValidationError("model: '" + what + "' has the wrong row count");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        m.row(r) = vector_from_json(j[static_cast<std::size_t>(r)], cols, what).transpose();
    return m;
}

}  // namespace cpsdiag::detail
