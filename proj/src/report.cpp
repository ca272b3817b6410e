#include "cgec/report.hpp"

#include <charconv>
#include <cmath>
#include <memory>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "cgec/dataset.hpp"

namespace cgec {

using nlohmann::json;

namespace {

std::string on_off(bool flag) { return flag ? "on" : "off"; }

std::string policy_summary(const NormalizationPolicy& p) {
  return "trim=" + on_off(p.trim_surrounding_whitespace) +
         ", unify_line_endings=" + on_off(p.unify_line_endings) +
         ", nfc=" + on_off(p.apply_canonical_composition) +
         ", strip_internal_whitespace=" + on_off(p.strip_internal_whitespace);
}

std::string config_summary(const RunManifest& m) {
  return "max_n=" + std::to_string(m.bleu.max_order) + ", mp_t=" + format_real(m.mp.t);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) out.push_back(field);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

}  // namespace

std::string tool_version() { return CGEC_VERSION; }

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

json to_json(const NormalizationPolicy& p) {
  return {{"trim_surrounding_whitespace", p.trim_surrounding_whitespace},
          {"unify_line_endings", p.unify_line_endings},
          {"apply_canonical_composition", p.apply_canonical_composition},
          {"strip_internal_whitespace", p.strip_internal_whitespace}};
}

json to_json(const RunManifest& m) {
  json inputs = json::array();
  for (const auto& d : m.inputs) {
    inputs.push_back({{"role", d.role}, {"path", d.path}, {"sha256", d.sha256}});
  }
  std::vector<double> weights;
  for (std::size_t n = 1; n <= m.bleu.max_order; ++n) weights.push_back(m.bleu.weight(n));
  return {{"tool", "cgec-eval"},
          {"tool_version", m.tool_version},
          {"inputs", inputs},
          {"normalization", to_json(m.policy)},
          {"bleu", {{"max_order", m.bleu.max_order}, {"weights", weights}, {"smoothing", "none"}}},
          {"meaning_preservation", {{"t", m.mp.t}}},
          {"timestamp", m.timestamp}};
}

json to_json(const MetricReport& r) {
  json precisions = json::array();
  for (const auto& pc : r.bleu.precisions) {
    precisions.push_back({{"order", pc.order},
                          {"numerator", pc.numerator},
                          {"denominator", pc.denominator},
                          {"defined", pc.defined()},
                          {"value", pc.value()}});
  }
  json out = {
      {"system", r.system_name},
      {"instances", r.instances},
      {"acc_sen", r.acc_sen},
      {"bleu",
       {{"score", r.bleu.score},
        {"log_average", r.bleu.log_average},
        {"precisions", precisions},
        {"brevity_penalty",
         {{"value", r.bleu.brevity.value},
          {"hypothesis_length", r.bleu.brevity.hypothesis_length},
          {"reference_length", r.bleu.brevity.reference_length},
          {"defined", r.bleu.brevity.defined()}}}}},
      {"mp", r.mp},
      {"mp_average", r.mp_average},
      {"mp_prime", r.mp_prime},
      {"diagnostics", r.diagnostics},
  };
  if (r.per_sentence) {
    json rows = json::array();
    for (const auto& s : *r.per_sentence) {
      rows.push_back({{"id", s.id},
                      {"match", s.match},
                      {"s_cm", s.s_cm},
                      {"hypothesis_length", s.hypothesis_length},
                      {"closest_reference_length", s.closest_reference_length}});
    }
    out["per_sentence"] = std::move(rows);
  }
  return out;
}

json to_json(const CorrelationMatrix& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"first", e.first}, {"second", e.second}, {"r", e.r}, {"p", e.p}});
  }
  return {{"columns", m.columns}, {"pairs", entries}};
}

json evaluation_json(const RunManifest& manifest, const std::vector<MetricReport>& reports) {
  json list = json::array();
  for (const auto& r : reports) list.push_back(to_json(r));
  return {{"manifest", to_json(manifest)}, {"reports", list}};
}

MetricTable to_metric_table(const std::vector<MetricReport>& reports) {
  MetricTable t;
  t.columns = {{"acc_sen", {}}, {"bleu_c", {}}, {"mp", {}}, {"mp_average", {}}, {"mp_prime", {}}};
  for (const auto& r : reports) {
    t.system_names.push_back(r.system_name);
    t.columns[0].values.push_back(r.acc_sen);
    t.columns[1].values.push_back(r.bleu.score);
    t.columns[2].values.push_back(r.mp);
    t.columns[3].values.push_back(r.mp_average);
    t.columns[4].values.push_back(r.mp_prime);
  }
  return t;
}

void write_evaluation_markdown(std::ostream& out, const RunManifest& manifest,
                               const std::vector<MetricReport>& reports) {
  out << "| System | Acc_sen | BLEU_c | MP′ |\n";
  out << "|---|---|---|---|\n";
  for (const auto& r : reports) {
    out << "| " << r.system_name << " | " << format_real(r.acc_sen) << " | "
        << format_real(r.bleu.score) << " | " << format_real(r.mp_prime) << " |\n";
  }
  out << '\n';
  if (!reports.empty()) out << "MP_average: " << format_real(reports.front().mp_average) << '\n';
  out << "Normalization: " << policy_summary(manifest.policy) << '\n';
  out << "Config: " << config_summary(manifest) << '\n';
}

void write_metric_table_tsv(std::ostream& out, const MetricTable& table,
                            const RunManifest* manifest) {
  if (manifest) {
    out << "# normalization: " << policy_summary(manifest->policy) << '\n';
    out << "# config: " << config_summary(*manifest) << '\n';
  }
  out << "system";
  for (const auto& c : table.columns) out << '\t' << c.name;
  out << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out << table.system_names[i];
    for (const auto& c : table.columns) out << '\t' << format_real(c.values[i]);
    out << '\n';
  }
}

MetricTable read_metric_table(std::istream& in, const std::string& origin) {
  MetricTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    const std::string at = origin + ":" + std::to_string(lineno) + ": ";
    if (!have_header) {
      if (fields.size() < 3) throw DataError(at + "header needs a name column and 2+ metrics");
      for (std::size_t k = 1; k < fields.size(); ++k) {
        if (fields[k].empty()) throw DataError(at + "empty column name");
        table.columns.push_back({fields[k], {}});
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size() + 1) {
      throw DataError(at + "expected " + std::to_string(table.columns.size() + 1) +
                      " fields, found " + std::to_string(fields.size()));
    }
    table.system_names.push_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const std::string& f = fields[k];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty() || !std::isfinite(v)) {
        throw DataError(at + "column '" + table.columns[k - 1].name + "': '" + f +
                        "' is not a number");
      }
      table.columns[k - 1].values.push_back(v);
    }
  }
  if (!have_header) throw DataError(origin + ": empty metric table");
  return table;
}

MetricTable load_metric_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return read_metric_table(in, path.string());
}

void write_correlation_markdown(std::ostream& out, const CorrelationMatrix& matrix) {
  const auto& cols = matrix.columns;
  out << '|';
  for (const auto& c : cols) out << " | " << c;
  out << " |\n|---";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "|---";
  out << "|\n";
  for (std::size_t row = 0; row < cols.size(); ++row) {
    out << "| " << cols[row];
    for (std::size_t col = 0; col < cols.size(); ++col) {
      if (col >= row) {
        out << " | -";
      } else {
        const auto e = matrix.at(cols[row], cols[col]);
        out << " | " << format_real(e.r) << " (" << format_real(e.p) << ")";
      }
    }
    out << " |\n";
  }
}

}  // namespace cgec
