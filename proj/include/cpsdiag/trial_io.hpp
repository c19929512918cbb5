#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cpsdiag/simulator.hpp"

namespace cpsdiag {

// File names of a persisted trial directory.
const std::vector<std::string>& trial_files();

// Creates `dir` if needed and writes every file of trial_files().
void write_trial(const std::filesystem::path& dir, const TrialDataset& d);
TrialDataset read_trial(const std::filesystem::path& dir);

}  // namespace cpsdiag
