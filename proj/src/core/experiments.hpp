#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace mln {

inline constexpr const char* kVersion = "0.1.0";

struct Check {
    std::string name;
    bool pass = true;
    bool hard = true;  // hard checks decide the exit status
    std::string detail;
};

struct FileEntry {
    std::string name;  // relative to the output directory
    std::uint64_t bytes = 0;
    std::uint64_t fnv1a = 0;
};

struct RunManifest {
    std::string experiment;
    std::string version = kVersion;
    std::uint64_t seed = 0;
    double wall_time_s = 0;
    std::vector<Check> checks;
    std::vector<FileEntry> files;
    std::vector<std::string> warnings;
    std::string config_echo;

    bool ok() const {
        for (const auto& c : checks)
            if (c.hard && !c.pass) return false;
        return true;
    }
};

struct RunResult {
    RunManifest manifest;
    std::string summary;  // one line per check, human readable
    std::filesystem::path out_dir;
};

// Resolves the output directory: explicit override, then the config value,
// then $MLN_OUT_ROOT/<experiment>, then ./runs/<experiment>.
std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg,
                                      const std::string& override_dir);

// Dispatches the experiment, writes all artifacts plus manifest.json
// (atomically, last) and returns the manifest with a printable summary.
RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir, int workers);

}  // namespace mln
