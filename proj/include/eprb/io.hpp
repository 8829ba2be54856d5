#pragma once

// CSV files for pair and raw data, and the JSON sidecar holding a
// condition's settings.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eprb/data.hpp"

namespace eprb::io {

using json = nlohmann::json;

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InvalidArgument("not an integer: '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

inline void expect_header(std::istream& in, const std::string& header, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw InvalidArgument(path + ": expected header '" + header + "', got '" + line + "'");
}

inline int parse_pm1(const std::string& s, const std::string& where) {
  const auto v = parse_int(s);
  if (v != 1 && v != -1) throw InvalidArgument(where + ": outcome must be -1 or 1");
  return static_cast<int>(v);
}

inline void write_pairs(const std::string& path, const PairDataSet& d) {
  auto out = open_out(path);
  out << "n,a,b\n";
  for (std::size_t k = 0; k < d.pairs.size(); ++k)
    out << k << ',' << int(d.pairs[k].a) << ',' << int(d.pairs[k].b) << '\n';
}

inline std::vector<OutcomePair> read_pairs(const std::string& path) {
  auto in = open_in(path);
  expect_header(in, "n,a,b", path);
  std::vector<OutcomePair> pairs;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto c = split(line);
    const std::string where = path + ":" + std::to_string(row);
    if (c.size() != 3) throw InvalidArgument(where + ": expected 3 columns");
    pairs.push_back({static_cast<std::int8_t>(parse_pm1(c[1], where)), static_cast<std::int8_t>(parse_pm1(c[2], where))});
  }
  return pairs;
}

inline void write_raw(const std::string& path, const RawStream& s) {
  auto out = open_out(path);
  out << "n,x,t,r\n";
  for (std::size_t k = 0; k < s.events.size(); ++k) {
    const auto& e = s.events[k];
    out << k << ',' << int(e.x) << ',' << format_double(e.t) << ',' << int(e.r) << '\n';
  }
}

inline RawStream read_raw(const std::string& path, int station) {
  auto in = open_in(path);
  expect_header(in, "n,x,t,r", path);
  RawStream s{station, {}};
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto c = split(line);
    const std::string where = path + ":" + std::to_string(row);
    if (c.size() != 4) throw InvalidArgument(where + ": expected 4 columns");
    RawEvent e;
    e.x = static_cast<std::int8_t>(parse_pm1(c[1], where));
    e.t = parse_double(c[2]);
    if (!(e.t >= 0)) throw InvalidArgument(where + ": time tag must be nonnegative");
    const auto r = parse_int(c[3]);
    if (r != 0 && r != 1) throw InvalidArgument(where + ": setting bit must be 0 or 1");
    e.r = static_cast<std::int8_t>(r);
    s.events.push_back(e);
  }
  return s;
}

inline json direction_json(const Direction& d) {
  if (d.is_photon()) return json::array({d.angle()});
  return json::array({d.bloch()[0], d.bloch()[1], d.bloch()[2]});
}

inline json condition_json(const ConditionLabel& c) {
  if (c.setting1.kind() != c.setting2.kind()) throw InvalidArgument("settings of one condition must be of the same kind");
  return {{"s", c.s},
          {"kind", c.setting1.is_photon() ? "photon2d" : "spin3d"},
          {"setting1", direction_json(c.setting1)},
          {"setting2", direction_json(c.setting2)}};
}

inline ConditionLabel condition_from_json(const json& j) {
  ConditionLabel c;
  c.s = j.at("s").get<int>();
  if (c.s < 1 || c.s > 4) throw InvalidArgument("condition index must be in 1..4");
  const auto kind = j.at("kind").get<std::string>();
  auto dir = [&](const json& v) {
    if (kind == "photon2d") {
      if (v.size() != 1) throw InvalidArgument("photon setting needs one angle");
      return Direction::photon(v[0].get<double>());
    }
    if (kind == "spin3d") {
      if (v.size() != 3) throw InvalidArgument("spin setting needs three components");
      return Direction::spin({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
    }
    throw InvalidArgument("unknown setting kind '" + kind + "'");
  };
  c.setting1 = dir(j.at("setting1"));
  c.setting2 = dir(j.at("setting2"));
  return c;
}

inline void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

inline std::string read_text(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A pair file plus its sidecar, when one exists next to it (x.csv -> x.json).
inline PairDataSet read_dataset(const std::string& csv_path, int default_s) {
  PairDataSet d;
  d.pairs = read_pairs(csv_path);
  d.condition.s = default_s;
  std::string side = csv_path;
  if (side.size() > 4 && side.compare(side.size() - 4, 4, ".csv") == 0) side.replace(side.size() - 4, 4, ".json");
  std::ifstream probe(side);
  if (side != csv_path && probe) d.condition = condition_from_json(json::parse(read_text(side)));
  return d;
}

}  // namespace eprb::io
