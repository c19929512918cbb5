#include "cpsdiag/telemetry.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "cpsdiag/error.hpp"
#include "cpsdiag/graph_io.hpp"

namespace cpsdiag {

using nlohmann::json;

void TimeSeriesFrame::validate() const {
    if (static_cast<std::size_t>(values.rows()) != timestamps.size())
        throw ValidationError("frame: row count does not match timestamp count");
    if (static_cast<std::size_t>(values.cols()) != signal_names.size())
        throw ValidationError("frame: column count does not match signal names");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
        if (timestamps[i] <= timestamps[i - 1])
            throw ValidationError("frame: timestamps must be strictly increasing (row " +
                                  std::to_string(i) + ")");
    if (!values.allFinite()) throw ValidationError("frame: non-finite value");
    std::set<std::string> names(signal_names.begin(), signal_names.end());
    if (names.size() != signal_names.size()) throw ValidationError("frame: duplicate signal name");
}

TimeSeriesFrame TimeSeriesFrame::slice_rows(std::size_t first, std::size_t count) const {
    if (first + count > rows()) throw ValidationError("frame: row slice out of range");
    TimeSeriesFrame out;
    out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(first),
                          timestamps.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.signal_names = signal_names;
    out.values = values.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
    return out;
}

Eigen::MatrixXd TimeSeriesFrame::columns(const std::vector<std::string>& order) const {
    std::map<std::string_view, Eigen::Index> pos;
    for (std::size_t i = 0; i < signal_names.size(); ++i)
        pos.emplace(signal_names[i], static_cast<Eigen::Index>(i));
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(order.size()));
    std::string missing;
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto it = pos.find(order[k]);
        if (it == pos.end()) {
            missing += (missing.empty() ? "" : ", ") + order[k];
            continue;
        }
        out.col(static_cast<Eigen::Index>(k)) = values.col(it->second);
    }
    if (!missing.empty()) throw ValidationError("frame: missing signals: " + missing);
    return out;
}

SubsystemSignalsMap::SubsystemSignalsMap(Assignments assignments)
    : assignments_(std::move(assignments)) {
    for (const auto& [sub, signals] : assignments_) {
        if (sub.empty()) throw ValidationError("signals map: empty subsystem id");
        if (signals.empty())
            throw ValidationError("signals map: subsystem '" + sub + "' has no signals");
        for (const auto& s : signals) {
            if (s.empty()) throw ValidationError("signals map: empty signal name in '" + sub + "'");
            auto [it, fresh] = owner_.emplace(s, sub);
            if (!fresh)
                throw ValidationError("signals map: signal '" + s + "' assigned to both '" +
                                      it->second + "' and '" + sub + "'");
        }
    }
}

std::vector<std::string> SubsystemSignalsMap::signal_order() const {
    std::vector<std::string> out;
    out.reserve(owner_.size());
    for (const auto& [sub, signals] : assignments_) out.insert(out.end(), signals.begin(), signals.end());
    return out;
}

const SubsystemId& SubsystemSignalsMap::subsystem_of(std::string_view signal) const {
    auto it = owner_.find(signal);
    if (it == owner_.end())
        throw ValidationError("signals map: unknown signal '" + std::string(signal) + "'");
    return it->second;
}

void SubsystemSignalsMap::check_covers(const CausalGraph& g) const {
    for (const auto& id : g.nodes())
        if (!assignments_.contains(id))
            throw ValidationError("signals map: graph node '" + id + "' has no signals");
    for (const auto& [sub, signals] : assignments_)
        if (!g.contains(sub))
            throw ValidationError("signals map: subsystem '" + sub + "' is not a graph node");
}

void SubsystemSignalsMap::check_signals(const std::vector<std::string>& signals) const {
    std::set<std::string, std::less<>> given(signals.begin(), signals.end());
    std::string missing, extra;
    for (const auto& [s, sub] : owner_)
        if (!given.contains(s)) missing += " " + s;
    for (const auto& s : given)
        if (!owner_.contains(s)) extra += " " + s;
    if (missing.empty() && extra.empty()) return;
    std::string msg = "signals map does not match telemetry columns";
    if (!missing.empty()) msg += "; not in telemetry:" + missing;
    if (!extra.empty()) msg += "; not in map:" + extra;
    throw ValidationError(msg);
}

SubsystemSignalsMap signals_map_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("signals map: expected a JSON object");
    SubsystemSignalsMap::Assignments a;
    for (const auto& [sub, list] : j.items()) {
        if (!list.is_array())
            throw ValidationError("signals map: value for '" + sub + "' must be an array");
        auto& dst = a[sub];
        for (const auto& s : list) {
            if (!s.is_string())
                throw ValidationError("signals map: signal names in '" + sub + "' must be strings");
            dst.push_back(s.get<std::string>());
        }
    }
    return SubsystemSignalsMap(std::move(a));
}

json signals_map_to_json(const SubsystemSignalsMap& m) {
    json j = json::object();
    for (const auto& [sub, signals] : m.assignments()) j[sub] = signals;
    return j;
}

SubsystemSignalsMap load_signals_map(const std::filesystem::path& path) {
    try {
        return signals_map_from_json(read_json_file(path));
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind(path.string(), 0) == 0) throw;
        throw ValidationError(path.string() + ": " + msg);
    }
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == line.npos ? line.npos : comma - pos));
        if (comma == line.npos) break;
        pos = comma + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    }
    return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

std::string context(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::int64_t parse_timestamp(std::string_view text) {
    std::int64_t v = 0;
    if (parse_number(text, v)) return v;
    // YYYY-MM-DDTHH:MM:SS with optional trailing Z; a space may replace T.
    int Y = 0, M = 0, D = 0, h = 0, m = 0, s = 0;
    auto field = [&](std::size_t pos, std::size_t len, int& dst) {
        return pos + len <= text.size() && parse_number(text.substr(pos, len), dst);
    };
    const bool ok = text.size() >= 19 && field(0, 4, Y) && text[4] == '-' && field(5, 2, M) &&
                    text[7] == '-' && field(8, 2, D) && (text[10] == 'T' || text[10] == ' ') &&
                    field(11, 2, h) && text[13] == ':' && field(14, 2, m) && text[16] == ':' &&
                    field(17, 2, s) && (text.size() == 19 || (text.size() == 20 && text[19] == 'Z'));
    if (!ok) throw ValidationError("invalid timestamp '" + std::string(text) + "'");
    using namespace std::chrono;
    const year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)}, day{static_cast<unsigned>(D)}};
    if (!ymd.ok() || h > 23 || m > 59 || s > 60)
        throw ValidationError("invalid timestamp '" + std::string(text) + "'");
    const auto secs = sys_days{ymd}.time_since_epoch() + hours{h} + minutes{m} + seconds{s};
    return duration_cast<seconds>(secs).count();
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

CsvStreamReader::CsvStreamReader(std::istream& in, std::string source)
    : in_(in), source_(std::move(source)) {
    std::string header;
    if (!std::getline(in_, header)) throw ValidationError(source_ + ": missing CSV header");
    line_ = 1;
    const auto fields = split_csv(header);
    if (fields.empty() || fields[0] != "timestamp")
        throw ValidationError(context(source_, 1) + "first header column must be 'timestamp'");
    std::set<std::string_view> seen;
    for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].empty()) throw ValidationError(context(source_, 1) + "empty column name");
        if (!seen.insert(fields[i]).second)
            throw ValidationError(context(source_, 1) + "duplicate column '" + std::string(fields[i]) + "'");
        names_.emplace_back(fields[i]);
    }
}

bool CsvStreamReader::next(std::int64_t& timestamp, std::vector<double>& row) {
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (text.empty() || text == "\r") continue;
        const auto fields = split_csv(text);
        if (fields.size() != names_.size() + 1)
            throw ValidationError(context(source_, line_) + "expected " +
                                  std::to_string(names_.size() + 1) + " fields, got " +
                                  std::to_string(fields.size()));
        try {
            timestamp = parse_timestamp(fields[0]);
        } catch (const ValidationError& e) {
            throw ValidationError(context(source_, line_) + e.what());
        }
        row.resize(names_.size());
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!parse_number(fields[i + 1], row[i]) || !std::isfinite(row[i]))
                throw ValidationError(context(source_, line_) + "column '" + names_[i] +
                                      "': invalid number '" + std::string(fields[i + 1]) + "'");
        }
        return true;
    }
    return false;
}

TimeSeriesFrame read_csv(std::istream& in, const std::string& source) {
    CsvStreamReader reader(in, source);
    TimeSeriesFrame frame;
    frame.signal_names = reader.signal_names();
    std::vector<double> flat, row;
    std::int64_t t = 0;
    while (reader.next(t, row)) {
        if (!frame.timestamps.empty() && t <= frame.timestamps.back())
            throw ValidationError(context(source, reader.line()) +
                                  "timestamps must be strictly increasing");
        frame.timestamps.push_back(t);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    const auto n = static_cast<Eigen::Index>(frame.timestamps.size());
    const auto p = static_cast<Eigen::Index>(frame.signal_names.size());
    frame.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), n, p);
    return frame;
}

TimeSeriesFrame read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    return read_csv(in, path.string());
}

void write_csv(std::ostream& out, const TimeSeriesFrame& frame) {
    out << "timestamp";
    for (const auto& n : frame.signal_names) out << ',' << n;
    out << '\n';
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        out << frame.timestamps[r];
        for (Eigen::Index c = 0; c < frame.values.cols(); ++c)
            out << ',' << format_double(frame.values(static_cast<Eigen::Index>(r), c));
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const TimeSeriesFrame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_csv(out, frame);
}

}  // namespace cpsdiag
