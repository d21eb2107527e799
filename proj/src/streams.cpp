#include "thermpc/streams.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "thermpc/building.hpp"
#include "thermpc/errors.hpp"
#include "thermpc/timebase.hpp"

namespace thermpc {

using nlohmann::json;

std::string_view to_string(StreamGroup g) {
  switch (g) {
    case StreamGroup::States: return "states";
    case StreamGroup::Inputs: return "inputs";
    case StreamGroup::Disturbances: return "disturbances";
    case StreamGroup::Derived: return "derived";
  }
  return "?";
}

StreamGroup parse_stream_group(std::string_view s) {
  for (StreamGroup g : kAllStreamGroups) {
    if (to_string(g) == s) return g;
  }
  throw InputError("unknown stream group '" + std::string(s) + "'");
}

void StreamStore::declare(const std::string& name, const std::string& unit, StreamGroup group) {
  if (name.empty()) throw InputError("stream name must not be empty");
  if (has(name)) throw InputError("stream '" + name + "' declared twice");
  index_[name] = streams_.size();
  streams_.push_back(Stream{name, unit, group, {}, {}});
}

void StreamStore::append(const std::string& name, std::int64_t timestamp, double value) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InputError("stream '" + name + "' was not declared");
  Stream& s = streams_[it->second];
  if (!s.timestamps.empty() && timestamp <= s.timestamps.back()) {
    throw InputError("stream '" + name + "': timestamps must be strictly increasing");
  }
  s.timestamps.push_back(timestamp);
  s.values.push_back(value);
}

const Stream& StreamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InputError("missing stream '" + name + "'");
  return streams_[it->second];
}

std::vector<const Stream*> StreamStore::group(StreamGroup g) const {
  std::vector<const Stream*> out;
  for (const auto& s : streams_) {
    if (s.group == g) out.push_back(&s);
  }
  return out;
}

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string export_csv(const StreamStore& store, StreamGroup group) {
  const auto streams = store.group(group);
  std::string out = "timestamp";
  for (const Stream* s : streams) out += "," + s->name + " [" + s->unit + "]";
  out += "\n";
  std::set<std::int64_t> times;
  for (const Stream* s : streams) times.insert(s->timestamps.begin(), s->timestamps.end());
  std::vector<std::size_t> cursor(streams.size(), 0);
  for (std::int64_t t : times) {
    out += format_iso8601(t);
    for (std::size_t i = 0; i < streams.size(); ++i) {
      out += ",";
      const Stream& s = *streams[i];
      if (cursor[i] < s.timestamps.size() && s.timestamps[cursor[i]] == t) out += format_value(s.values[cursor[i]++]);
    }
    out += "\n";
  }
  return out;
}

void import_csv(std::string_view text, StreamGroup group, StreamStore& store) {
  std::vector<std::string> names;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = "stream CSV line " + std::to_string(line_no);
    if (header) {
      if (fields.empty() || fields[0] != "timestamp") throw InputError(where + ": first column must be 'timestamp'");
      for (std::size_t i = 1; i < fields.size(); ++i) {
        const std::string_view f = fields[i];
        const auto open = f.rfind(" [");
        if (open == std::string_view::npos || f.back() != ']') throw InputError(where + ": column '" + std::string(f) + "' lacks a [unit]");
        names.emplace_back(f.substr(0, open));
        store.declare(names.back(), std::string(f.substr(open + 2, f.size() - open - 3)), group);
      }
      header = false;
      continue;
    }
    if (fields.size() != names.size() + 1) throw InputError(where + ": expected " + std::to_string(names.size() + 1) + " fields");
    std::int64_t t = 0;
    try {
      t = parse_iso8601(fields[0]);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      const std::string_view f = fields[i + 1];
      if (f.empty()) continue;
      double v = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        if (f == "nan") v = std::nan("");
        else if (f == "inf") v = INFINITY;
        else if (f == "-inf") v = -INFINITY;
        else throw InputError(where + ": '" + std::string(f) + "' is not a number");
      }
      store.append(names[i], t, v);
    }
  }
  if (header) throw InputError("stream CSV: missing header");
}

json export_json(const StreamStore& store) {
  json streams = json::array();
  for (const auto& s : store.streams()) {
    json times = json::array();
    for (std::int64_t t : s.timestamps) times.push_back(format_iso8601(t));
    streams.push_back({{"name", s.name},
                       {"unit", s.unit},
                       {"group", std::string(to_string(s.group))},
                       {"timestamps", times},
                       {"values", s.values}});
  }
  return {{"format", "thermpc-streams"}, {"version", 1}, {"streams", streams}};
}

StreamStore import_json(const json& doc) {
  StreamStore store;
  try {
    if (doc.at("format") != "thermpc-streams") throw InputError("stream JSON: unexpected format tag");
    for (const auto& s : doc.at("streams")) {
      const std::string name = s.at("name").get<std::string>();
      store.declare(name, s.at("unit").get<std::string>(), parse_stream_group(s.at("group").get<std::string>()));
      const auto& times = s.at("timestamps");
      const auto& values = s.at("values");
      if (times.size() != values.size()) throw InputError("stream JSON: '" + name + "' has mismatched lengths");
      for (std::size_t i = 0; i < times.size(); ++i) {
        store.append(name, parse_iso8601(times[i].get<std::string>()), values[i].get<double>());
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("stream JSON: ") + e.what());
  }
  return store;
}

void write_stream_csvs(const StreamStore& store, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (StreamGroup g : kAllStreamGroups) {
    const auto path = std::filesystem::path(dir) / (std::string(to_string(g)) + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f << export_csv(store, g);
  }
}

StreamStore read_stream_csvs(const std::string& dir) {
  StreamStore store;
  for (StreamGroup g : kAllStreamGroups) {
    const auto path = std::filesystem::path(dir) / (std::string(to_string(g)) + ".csv");
    import_csv(read_text_file(path.string()), g, store);
  }
  return store;
}

}  // namespace thermpc
