#include "melanie/graph/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace melanie::graph {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ParseError::ParseError(const std::filesystem::path& file, std::size_t line, const std::string& what)
    : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what),
      file_(file),
      line_(line) {}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("failed to format double");
  return std::string(buf, ptr);
}

TemporalInteractionNetwork load_event_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file, 0, "cannot open file");

  struct RawRow {
    ViewerId source;
    ViewerId target;
    double time;
    double throughput;
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(file, 1, "empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    throw ParseError(file, line_no, std::string("expected header '") + kTraceHeader + "'");
  }

  std::unordered_map<std::string, ViewerId> dense;
  std::vector<std::string> original;
  auto densify = [&](const std::string& token) {
    auto [it, inserted] = dense.try_emplace(token, static_cast<ViewerId>(original.size()));
    if (inserted) original.push_back(token);
    return it->second;
  };

  std::vector<RawRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ParseError(file, line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(file, line_no, "empty viewer id");
    if (fields[0] == fields[1]) throw ParseError(file, line_no, "self interaction");
    double time = 0.0;
    double throughput = 0.0;
    if (!parse_double(fields[2], time)) throw ParseError(file, line_no, "non-numeric time");
    if (!parse_double(fields[3], throughput)) {
      throw ParseError(file, line_no, "non-numeric throughput");
    }
    if (!std::isfinite(time) || time < 0.0) throw ParseError(file, line_no, "negative time");
    if (!std::isfinite(throughput) || throughput < 0.0) {
      throw ParseError(file, line_no, "negative throughput");
    }
    const ViewerId s = densify(fields[0]);
    const ViewerId t = densify(fields[1]);
    rows.push_back(RawRow{s, t, time, throughput});
  }
  if (rows.empty()) throw ParseError(file, line_no, "no interactions");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const RawRow& a, const RawRow& b) { return a.time < b.time; });
  std::vector<Interaction> interactions;
  interactions.reserve(rows.size());
  for (const RawRow& r : rows) {
    interactions.push_back(Interaction{r.source, r.target, r.time, r.throughput});
  }
  const std::size_t n = original.size();
  return TemporalInteractionNetwork(file.stem().string(), n, std::move(interactions), false,
                                    std::move(original));
}

std::vector<TemporalInteractionNetwork> load_events(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::invalid_argument("not a readable directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!ends_with(name, ".csv") || ends_with(name, ".idmap.csv")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TemporalInteractionNetwork> networks;
  networks.reserve(files.size());
  for (const auto& f : files) networks.push_back(load_event_file(f));
  return networks;
}

void write_event_file(const TemporalInteractionNetwork& network, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto trace = dir / (network.event_id() + ".csv");
  std::ofstream out(trace);
  if (!out) throw std::runtime_error("cannot write " + trace.string());
  out << kTraceHeader << '\n';
  for (const Interaction& e : network.interactions()) {
    out << network.original_id(e.source) << ',' << network.original_id(e.target) << ','
        << format_double(e.time) << ',' << format_double(e.throughput) << '\n';
  }

  const auto idmap = dir / (network.event_id() + ".idmap.csv");
  std::ofstream map(idmap);
  if (!map) throw std::runtime_error("cannot write " + idmap.string());
  map << kIdMapHeader << '\n';
  for (std::size_t i = 0; i < network.num_viewers(); ++i) {
    map << network.original_id(static_cast<ViewerId>(i)) << ',' << i << '\n';
  }
}

void write_events(std::span<const TemporalInteractionNetwork> networks,
                  const std::filesystem::path& dir) {
  for (const auto& n : networks) write_event_file(n, dir);
}

}  // namespace melanie::graph
