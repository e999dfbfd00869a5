#include "mapkit/report.hpp"

#include <charconv>
#include <map>

#include <json.hpp>

#include "mapkit/error.hpp"
#include "mapkit/format.hpp"

namespace mapkit {
namespace {

struct Family {
  const char* name;
  std::vector<std::string> input_header;
  std::vector<bool> numeric;  // per input column
};

const std::vector<Family>& families() {
  static const std::vector<Family> f{
      {"tau", {"benchmark", "protocol", "tau"}, {false, false, true}},
      {"scores", {"step", "protocol", "score"}, {true, false, true}},
      {"passk",
       {"checkpoint", "benchmark", "k", "value", "variance"},
       {false, false, true, true, true}},
      {"cost", {"n", "cost"}, {true, true}},
      {"prr",
       {"model", "score_pt", "score_sft", "rank_pt", "rank_sft"},
       {false, true, true, true, true}},
  };
  return f;
}

bool is_number(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

std::string ReportTable::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

const ReportTable& Report::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::SchemaMismatch, "report has no table '" + name + "'");
}

std::string Report::to_json() const {
  // Numbers are copied verbatim from the CSV cells so the 17-digit text
  // survives unchanged.
  std::string out = "{";
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const auto& table = tables[t];
    out += (t ? "," : "") + json_string(table.name) + ":[";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      out += r ? ",{" : "{";
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out += (c ? "," : "") + json_string(table.columns[c]) + ":";
        const auto& cell = table.rows[r][c];
        out += table.numeric[c] && is_number(cell) ? cell : json_string(cell);
      }
      out += "}";
    }
    out += "]";
  }
  out += "}\n";
  return out;
}

CsvDocument parse_csv(const std::string& text, const std::string& source) {
  CsvDocument doc;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                    : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (doc.header.empty()) {
      doc.header = std::move(cells);
    } else if (cells.size() != doc.header.size()) {
      throw Error(ErrorCode::SchemaMismatch, source + ":" + std::to_string(line_no) + ": expected " +
                                                 std::to_string(doc.header.size()) + " columns");
    } else {
      doc.rows.push_back(std::move(cells));
    }
  }
  return doc;
}

Report build_report(const std::vector<std::filesystem::path>& inputs,
                    const ReportOptions& options) {
  Report report;
  for (const auto& f : families()) {
    ReportTable t{f.name, {"source"}, {false}, {}};
    t.columns.insert(t.columns.end(), f.input_header.begin(), f.input_header.end());
    t.numeric.insert(t.numeric.end(), f.numeric.begin(), f.numeric.end());
    report.tables.push_back(std::move(t));
  }

  for (const auto& path : inputs) {
    const auto source = path.generic_string();
    const auto doc = parse_csv(read_text_file(path), source);
    std::size_t family = families().size();
    for (std::size_t i = 0; i < families().size(); ++i) {
      if (families()[i].input_header == doc.header) family = i;
    }
    if (family == families().size()) {
      throw Error(ErrorCode::SchemaMismatch, source + ": unrecognised CSV header");
    }
    for (const auto& row : doc.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (families()[family].numeric[c] && !is_number(row[c])) {
          throw Error(ErrorCode::SchemaMismatch,
                      source + ": column '" + doc.header[c] + "' is not numeric: '" + row[c] + "'");
        }
      }
      std::vector<std::string> out{source};
      out.insert(out.end(), row.begin(), row.end());
      report.tables[family].rows.push_back(std::move(out));
    }
  }

  // Win counts of candidate over baseline tau, one comparison per
  // (source, benchmark) that reports both protocols.
  ReportTable summary{"summary",
                      {"baseline", "candidate", "runs", "wins", "win_rate"},
                      {false, false, true, true, true},
                      {}};
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> taus;
  for (const auto& row : report.tables[0].rows) {
    taus[{row[0], row[1]}][row[2]] = std::stod(row[3]);
  }
  std::int64_t runs = 0, wins = 0;
  for (const auto& [key, by_protocol] : taus) {
    const auto b = by_protocol.find(options.baseline);
    const auto c = by_protocol.find(options.candidate);
    if (b == by_protocol.end() || c == by_protocol.end()) continue;
    ++runs;
    wins += c->second > b->second;
  }
  if (runs > 0) {
    summary.rows.push_back({options.baseline, options.candidate, std::to_string(runs),
                            std::to_string(wins),
                            format_real(static_cast<double>(wins) / static_cast<double>(runs))});
  }
  report.tables.push_back(std::move(summary));
  return report;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& t : report.tables) write_file_atomic(dir / (t.name + ".csv"), t.to_csv());
  write_file_atomic(dir / "report.json", report.to_json());
}

}  // namespace mapkit
