#pragma once

// Report emission. JSON is the canonical payload; markdown and TSV are
// renderings of the same values. Every report carries a RunManifest so a
// score never travels without the rules it was computed under.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cgec/metrics.hpp"
#include "cgec/stats.hpp"
#include "cgec/textcore.hpp"

namespace cgec {

struct InputDigest {
  std::string role;  // "corpus" or "hypotheses:<system>"
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string tool_version;
  std::vector<InputDigest> inputs;
  NormalizationPolicy policy;
  BleuConfig bleu;
  MeaningPreservationConfig mp;
  std::string timestamp;  // ISO-8601 UTC
};

std::string tool_version();
std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();

/// Human formats use 6 significant digits.
std::string format_real(double value);

nlohmann::json to_json(const NormalizationPolicy& policy);
nlohmann::json to_json(const RunManifest& manifest);
nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const CorrelationMatrix& matrix);

/// {"manifest": ..., "reports": [...]}. The "reports" member is the
/// metric payload and is byte-reproducible for equal inputs and configs.
nlohmann::json evaluation_json(const RunManifest& manifest,
                               const std::vector<MetricReport>& reports);

/// Columns: acc_sen, bleu_c, mp, mp_average, mp_prime.
MetricTable to_metric_table(const std::vector<MetricReport>& reports);

void write_evaluation_markdown(std::ostream& out, const RunManifest& manifest,
                               const std::vector<MetricReport>& reports);
void write_metric_table_tsv(std::ostream& out, const MetricTable& table,
                            const RunManifest* manifest = nullptr);

/// TSV with a header row; the first column holds system names. Blank lines
/// and lines starting with '#' are skipped.
MetricTable read_metric_table(std::istream& in, const std::string& origin = "<stream>");
MetricTable load_metric_table(const std::filesystem::path& path);

/// Lower-triangular "r (p)" matrix.
void write_correlation_markdown(std::ostream& out, const CorrelationMatrix& matrix);

}  // namespace cgec
