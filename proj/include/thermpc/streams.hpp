#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace thermpc {

enum class StreamGroup { States, Inputs, Disturbances, Derived };
std::string_view to_string(StreamGroup g);
StreamGroup parse_stream_group(std::string_view s);
inline constexpr StreamGroup kAllStreamGroups[] = {StreamGroup::States, StreamGroup::Inputs, StreamGroup::Disturbances,
                                                   StreamGroup::Derived};

struct Stream {
  std::string name;
  std::string unit;
  StreamGroup group = StreamGroup::Derived;
  std::vector<std::int64_t> timestamps;  // UTC seconds, strictly increasing
  std::vector<double> values;

  friend bool operator==(const Stream&, const Stream&) = default;
};

/// Named time series recorded during a run, in declaration order.
class StreamStore {
 public:
  void declare(const std::string& name, const std::string& unit, StreamGroup group);
  void append(const std::string& name, std::int64_t timestamp, double value);

  bool has(const std::string& name) const { return index_.count(name) > 0; }
  /// Throws InputError naming the stream when absent.
  const Stream& get(const std::string& name) const;
  const std::vector<Stream>& streams() const { return streams_; }
  std::vector<const Stream*> group(StreamGroup g) const;

  friend bool operator==(const StreamStore& a, const StreamStore& b) { return a.streams_ == b.streams_; }

 private:
  std::vector<Stream> streams_;
  std::map<std::string, std::size_t> index_;
};

/// One group as CSV: header `timestamp,<name> [<unit>],...`, ISO-8601 UTC timestamps, values
/// with 17 significant digits. Missing samples are empty cells.
std::string export_csv(const StreamStore& store, StreamGroup group);
/// Adds the streams of one CSV group document to `store`.
void import_csv(std::string_view text, StreamGroup group, StreamStore& store);

nlohmann::json export_json(const StreamStore& store);
StreamStore import_json(const nlohmann::json& doc);

/// Writes states.csv, inputs.csv, disturbances.csv and derived.csv into `dir`.
void write_stream_csvs(const StreamStore& store, const std::string& dir);
StreamStore read_stream_csvs(const std::string& dir);

}  // namespace thermpc
