#pragma once

// Text formats. Datasets are TSV lines `pop<TAB>sample_id<TAB>variant_id`
// with pop 1 or 2; a variant id of "." declares a sample that carries no
// variants. Tables and curves are CSV. Every writer can prepend
// `# key=value` comment lines so outputs record the seed and configuration.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vf/data.hpp"

namespace vf {

using Header = std::vector<std::pair<std::string, std::string>>;

/// Parses the TSV format. Duplicate triples collapse; `#` lines and blank
/// lines are skipped. Throws DataError with the line number on malformed
/// content.
VariantDataset read_tsv(std::istream& in);
VariantDataset load_tsv(const std::string& path);

void write_tsv(std::ostream& out, const VariantDataset& data, const Header& header = {});
void save_tsv(const std::string& path, const VariantDataset& data, const Header& header = {});

/// Per-variant frequencies in both populations; a population missing from
/// the file has frequency 0.
struct FrequencyRow {
  std::string variant;
  double freq[2] = {0.0, 0.0};
};

/// Reads `variant_id<TAB>pop<TAB>frequency` lines (commas also accepted as
/// separators). Throws DataError with the line number for frequencies outside
/// [0,1] or malformed lines.
std::vector<FrequencyRow> read_frequency_table(std::istream& in);
std::vector<FrequencyRow> load_frequency_table(const std::string& path);

void write_header(std::ostream& out, const Header& header);
void write_kton_csv(std::ostream& out, const KtonTable& table, const Header& header = {});
void write_growth_csv(std::ostream& out, const GrowthCurve& curve, const Header& header = {});
std::string fold_plan_json(const FoldPlan& plan);

/// Shortest round-trippable decimal form of x.
std::string format_double(double x);

}  // namespace vf
