#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cpsdiag/causal_graph.hpp"

namespace cpsdiag {

// Timestamped measurements: one row per time index, one column per signal.
struct TimeSeriesFrame {
    std::vector<std::int64_t> timestamps;
    std::vector<std::string> signal_names;
    Eigen::MatrixXd values;

    std::size_t rows() const { return timestamps.size(); }
    std::size_t cols() const { return signal_names.size(); }

    // Strictly increasing timestamps, consistent shape, finite values.
    void validate() const;
    TimeSeriesFrame slice_rows(std::size_t first, std::size_t count) const;
    // Columns reordered to `order`; throws ValidationError naming missing signals.
    Eigen::MatrixXd columns(const std::vector<std::string>& order) const;
};

// Partition of the signal set over subsystems.
class SubsystemSignalsMap {
public:
    using Assignments = std::map<SubsystemId, std::vector<std::string>>;

    SubsystemSignalsMap() = default;
    // Throws if a subsystem has no signals or a signal is assigned twice.
    explicit SubsystemSignalsMap(Assignments assignments);

    const Assignments& assignments() const { return assignments_; }
    std::size_t subsystem_count() const { return assignments_.size(); }
    // Concatenation of every subsystem's signals in map order.
    std::vector<std::string> signal_order() const;
    const SubsystemId& subsystem_of(std::string_view signal) const;

    void check_covers(const CausalGraph& g) const;
    // The union of assigned signals must equal `signals` (as a set).
    void check_signals(const std::vector<std::string>& signals) const;

    friend bool operator==(const SubsystemSignalsMap&, const SubsystemSignalsMap&) = default;

private:
    Assignments assignments_;
    std::map<std::string, SubsystemId, std::less<>> owner_;
};

SubsystemSignalsMap signals_map_from_json(const nlohmann::json& j);
nlohmann::json signals_map_to_json(const SubsystemSignalsMap& m);
SubsystemSignalsMap load_signals_map(const std::filesystem::path& path);

// CSV with a mandatory header whose first column is "timestamp" (integer or
// ISO-8601 "YYYY-MM-DDTHH:MM:SS[Z]", stored as epoch seconds).
TimeSeriesFrame read_csv(std::istream& in, const std::string& source = "<stream>");
TimeSeriesFrame read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const TimeSeriesFrame& frame);
void write_csv(const std::filesystem::path& path, const TimeSeriesFrame& frame);

std::int64_t parse_timestamp(std::string_view text);
// Shortest representation that parses back to the same double.
std::string format_double(double v);

// Incremental reader for streamed telemetry.
class CsvStreamReader {
public:
    explicit CsvStreamReader(std::istream& in, std::string source = "<stdin>");
    const std::vector<std::string>& signal_names() const { return names_; }
    // False at end of stream. Throws ValidationError with line context.
    bool next(std::int64_t& timestamp, std::vector<double>& row);
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::string source_;
    std::vector<std::string> names_;
    std::size_t line_ = 0;
};

}  // namespace cpsdiag
