#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtc/orchestrator.hpp"

namespace mtc {

std::string serialize_trajectory(const Trajectory& t);
Trajectory parse_trajectory_record(const std::string& line, std::size_t line_no);

std::string serialize_manifest(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);

// One run directory: trajectories.jsonl (append-only, single writer) plus
// manifest.json (rewritten at start and end of a run).
class TrajectoryStore {
public:
    explicit TrajectoryStore(std::string run_dir);

    const std::string& run_dir() const { return run_dir_; }
    std::string trajectory_path() const;
    std::string manifest_path() const;

    bool has_records() const;

    // Reads all records. When a (question_id, seed) pair appears more than
    // once (an aborted attempt later redone), the last record wins.
    std::vector<Trajectory> load_trajectories() const;

    std::optional<RunManifest> load_manifest() const;

    void append(const Trajectory& t);
    void write_manifest(const RunManifest& m);

private:
    std::string run_dir_;
};

}  // namespace mtc
