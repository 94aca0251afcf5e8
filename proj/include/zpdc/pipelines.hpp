#pragma once

#include <map>
#include <string>
#include <vector>

#include "zpdc/config.hpp"
#include "zpdc/crystal.hpp"
#include "zpdc/mode_grid.hpp"

namespace zpdc {

inline constexpr const char* kVersion = "0.1.0";

/// A pipeline produces named files (content held in memory so callers can
/// compare or write them atomically) plus human-readable progress lines.
struct PipelineResult {
  std::map<std::string, std::string> files;
  std::vector<std::string> messages;
};

ModeGrid grid_from_config(const RunConfig& config);
CrystalParams crystal_from_config(const RunConfig& config);
KernelParams kernel_from_config(const RunConfig& config);

PipelineResult run_dump_grid(const RunConfig& config);
PipelineResult run_correlate(const RunConfig& config);
PipelineResult run_detect(const RunConfig& config);
PipelineResult run_bell(const RunConfig& config);
PipelineResult run_scan(const RunConfig& config);

/// Resolved config + seed + version; the wall time is appended by the CLI
/// after the pipeline finishes.
std::string manifest_text(const RunConfig& config);

}  // namespace zpdc
