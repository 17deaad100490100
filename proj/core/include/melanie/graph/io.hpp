#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "melanie/graph/network.hpp"

namespace melanie::graph {

// Malformed event trace. The message names the file and 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::filesystem::path& file, std::size_t line, const std::string& what);

  const std::filesystem::path& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::filesystem::path file_;
  std::size_t line_;
};

inline constexpr const char* kTraceHeader = "src,dst,time,throughput";
inline constexpr const char* kIdMapHeader = "original_id,dense_id";

// Parses one `src,dst,time,throughput` trace. Viewer ids are opaque tokens,
// densified to 0..N-1 in order of first appearance. Rows are stably sorted
// by time.
TemporalInteractionNetwork load_event_file(const std::filesystem::path& file);

// Every *.csv in the directory except *.idmap.csv sidecars, ordered by file
// name.
std::vector<TemporalInteractionNetwork> load_events(const std::filesystem::path& dir);

// Writes <event>.csv (original ids) and <event>.idmap.csv per network.
void write_event_file(const TemporalInteractionNetwork& network, const std::filesystem::path& dir);
void write_events(std::span<const TemporalInteractionNetwork> networks,
                  const std::filesystem::path& dir);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace melanie::graph
