#pragma once

#include <string>
#include <vector>

#include "vtsize/config.hpp"
#include "vtsize/manifest.hpp"
#include "vtsize/report.hpp"

namespace vtsize {

/// Evaluate one record: extract -> split -> measure -> wrinkle-compensate ->
/// increments. Throws on unusable inputs; partial sizes are tolerated and
/// noted.
RecordReport evaluate_record(const ManifestRecord& record, const RunConfig& config);

/// Evaluate a batch and aggregate. Records are processed in id order (workers
/// permitting) and aggregated serially, so the result is independent of the
/// parallelism degree.
RunReport evaluate_batch(std::vector<ManifestRecord> records, const RunConfig& config);

/// CLI entry points. Each returns a process exit code:
/// 0 success, 1 record failures (always when every record failed, otherwise
/// only under strict), 2 configuration error.
int cmd_gen_masks(const RunConfig& config);
int cmd_adjust_garment(const RunConfig& config);
int cmd_tryon(const RunConfig& config);
int cmd_evaluate(const RunConfig& config, const std::string& report_path);
int cmd_report(const RunConfig& config, const std::string& report_path, const std::string& csv_path);

} // namespace vtsize
