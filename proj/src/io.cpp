#include "vf/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace vf {

namespace {

std::vector<std::string_view> split(std::string_view line, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find_first_of(seps, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

int parse_pop(std::string_view s, std::size_t line_no) {
  if (s == "1") return 0;
  if (s == "2") return 1;
  throw DataError("population must be 1 or 2, got '" + std::string(s) + "'", line_no);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

}  // namespace

VariantDataset read_tsv(std::istream& in) {
  struct Pending {
    std::string id;
    std::vector<VariantId> variants;
  };
  VariantDataset out;
  auto& reg = *out.registry();
  std::array<std::vector<Pending>, 2> pending;
  std::array<std::map<std::string, std::size_t, std::less<>>, 2> where;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    auto f = split(trim(line), "\t");
    if (f.size() != 3) throw DataError("expected 3 tab-separated fields", line_no);
    const int pop = parse_pop(trim(f[0]), line_no);
    auto sample = trim(f[1]);
    auto variant = trim(f[2]);
    if (sample.empty() || variant.empty()) throw DataError("empty sample or variant id", line_no);
    auto& idx = where[static_cast<std::size_t>(pop)];
    auto& list = pending[static_cast<std::size_t>(pop)];
    auto it = idx.find(sample);
    if (it == idx.end()) {
      it = idx.emplace(std::string(sample), list.size()).first;
      list.push_back({std::string(sample), {}});
    }
    if (variant != ".") list[it->second].variants.push_back(reg.intern(variant));
  }
  if (in.bad()) throw DataError("read error");
  for (int pop = 0; pop < 2; ++pop) {
    for (auto& s : pending[static_cast<std::size_t>(pop)]) out.add_sample(pop, std::move(s.id), std::move(s.variants));
  }
  return out;
}

VariantDataset load_tsv(const std::string& path) {
  auto in = open_in(path);
  return read_tsv(in);
}

void write_header(std::ostream& out, const Header& header) {
  for (const auto& [k, v] : header) out << "# " << k << '=' << v << '\n';
}

void write_tsv(std::ostream& out, const VariantDataset& data, const Header& header) {
  write_header(out, header);
  const auto& reg = *data.registry();
  for (int pop = 0; pop < 2; ++pop) {
    for (const auto& s : data.samples(pop)) {
      if (s.variants.empty()) out << pop + 1 << '\t' << s.id << "\t.\n";
      for (VariantId v : s.variants) out << pop + 1 << '\t' << s.id << '\t' << reg.label(v) << '\n';
    }
  }
}

void save_tsv(const std::string& path, const VariantDataset& data, const Header& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_tsv(out, data, header);
}

std::vector<FrequencyRow> read_frequency_table(std::istream& in) {
  std::vector<FrequencyRow> rows;
  std::map<std::string, std::size_t, std::less<>> where;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    auto f = split(trim(line), "\t,");
    if (f.size() != 3) throw DataError("expected variant_id, pop, frequency", line_no);
    auto variant = trim(f[0]);
    const int pop = parse_pop(trim(f[1]), line_no);
    auto text = trim(f[2]);
    double freq = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), freq);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw DataError("cannot parse frequency '" + std::string(text) + "'", line_no);
    }
    if (!(freq >= 0.0 && freq <= 1.0)) throw DataError("frequency outside [0,1]", line_no);
    auto it = where.find(variant);
    if (it == where.end()) {
      it = where.emplace(std::string(variant), rows.size()).first;
      rows.push_back({std::string(variant), {0.0, 0.0}});
    }
    rows[it->second].freq[pop] = freq;
  }
  return rows;
}

std::vector<FrequencyRow> load_frequency_table(const std::string& path) {
  auto in = open_in(path);
  return read_frequency_table(in);
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_kton_csv(std::ostream& out, const KtonTable& table, const Header& header) {
  write_header(out, header);
  out << "k1,k2,value\n";
  for (long k1 = 0; k1 <= table.v(); ++k1) {
    for (long k2 = 0; k2 <= table.v(); ++k2) {
      out << k1 << ',' << k2 << ',' << format_double(table.at(k1, k2)) << '\n';
    }
  }
}

void write_growth_csv(std::ostream& out, const GrowthCurve& curve, const Header& header) {
  write_header(out, header);
  out << "index,count\n";
  for (std::size_t i = 0; i < curve.counts.size(); ++i) out << i + 1 << ',' << format_double(curve.counts[i]) << '\n';
}

std::string fold_plan_json(const FoldPlan& plan) {
  nlohmann::json j;
  j["n_folds"] = plan.n_folds;
  j["seed"] = plan.seed;
  auto blocks = nlohmann::json::array();
  for (const auto& b : plan.blocks) blocks.push_back({{"pop1", b[0]}, {"pop2", b[1]}});
  j["blocks"] = blocks;
  return j.dump(2);
}

}  // namespace vf
