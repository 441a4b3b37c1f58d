#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace isac {

/// One evaluated (sweep point, method) result. The sqrt_* columns hold the
/// square roots of the corresponding mean columns (root-mean-square bounds)
/// and the file validator enforces that relationship.
struct ResultRow {
  std::uint64_t seed = 0;
  std::string axis_name;
  double axis_value = 0;
  std::string method;
  double mean_sum_rate = 0;
  double mean_crlb_theta = 0;
  double sqrt_crlb_theta = 0;
  double mean_crlb_dist = 0;
  double sqrt_crlb_dist = 0;
  double violation_rate_theta = 0;
  double violation_rate_dist = 0;
  double mean_power_w = 0;
  double train_seconds = 0;
};

/// Column order of the results schema, shared by writer, reader, validator.
const std::vector<std::string>& result_columns();

/// Writes "# isac-results 1", the column header, then one line per row,
/// all numbers in shortest round-trip form (byte-deterministic).
void write_results_csv(std::span<const ResultRow> rows,
                       const std::filesystem::path& file);

/// Reads a results file, enforcing the schema version, the header and the
/// field count per row. Throws std::runtime_error naming the problem.
std::vector<ResultRow> read_results_csv(const std::filesystem::path& file);

/// Re-checks row invariants: sqrt columns must equal the square roots of
/// their mean columns within 1e-12 (relative), rates within [0, 1], and the
/// method must be a known identifier. Throws on the first violation.
void validate_results(std::span<const ResultRow> rows);

}  // namespace isac
