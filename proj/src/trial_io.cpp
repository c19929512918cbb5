#include "cpsdiag/trial_io.hpp"

#include "cpsdiag/error.hpp"
#include "cpsdiag/graph_io.hpp"

namespace cpsdiag {

using nlohmann::json;

const std::vector<std::string>& trial_files() {
    static const std::vector<std::string> files = {
        "calibration.csv", "fault.json", "graph.json", "manifest.json",
        "map.json",        "test.csv",   "train.csv",  "validation.csv",
    };
    return files;
}

void write_trial(const std::filesystem::path& dir, const TrialDataset& d) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
    write_text_file(dir / "graph.json", graph_to_json(d.graph).dump(2) + "\n");
    write_text_file(dir / "map.json", signals_map_to_json(d.map).dump(2) + "\n");
    write_csv(dir / "train.csv", d.train);
    write_csv(dir / "validation.csv", d.validation);
    write_csv(dir / "calibration.csv", d.calibration);
    write_csv(dir / "test.csv", d.test);
    json fault = fault_to_json(d.fault);
    fault["seed"] = d.seed;
    write_text_file(dir / "fault.json", fault.dump(2) + "\n");
    write_text_file(dir / "manifest.json", d.manifest.dump(2) + "\n");
}

TrialDataset read_trial(const std::filesystem::path& dir) {
    for (const auto& f : trial_files())
        if (!std::filesystem::exists(dir / f))
            throw ValidationError("trial directory '" + dir.string() + "' is missing " + f);
    TrialDataset d;
    d.graph = load_graph(dir / "graph.json");
    d.map = load_signals_map(dir / "map.json");
    d.map.check_covers(d.graph);
    d.train = read_csv(dir / "train.csv");
    d.validation = read_csv(dir / "validation.csv");
    d.calibration = read_csv(dir / "calibration.csv");
    d.test = read_csv(dir / "test.csv");
    const json fault = read_json_file(dir / "fault.json");
    d.fault = fault_from_json(fault);
    if (!d.graph.contains(d.fault.target))
        throw ValidationError("fault target '" + d.fault.target + "' is not a node of the graph");
    d.seed = fault.value("seed", std::uint64_t{0});
    d.manifest = read_json_file(dir / "manifest.json");
    return d;
}

}  // namespace cpsdiag
