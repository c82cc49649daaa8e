// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy of
// the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations under
// the License.

#include "aerialdb/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "aerialdb/errors.hpp"

namespace aerialdb {

void Shard::fit_bounds() {
  if (tuples.empty()) return;
  bbox = BoundingBox::point(tuples.front().location);
  range = {tuples.front().timestamp, tuples.front().timestamp};
  for (const Tuple& t : tuples) {
    bbox.extend(t.location);
    range.start = std::min(range.start, t.timestamp);
    range.end = std::max(range.end, t.timestamp);
  }
}

std::shared_ptr<const ShardPayload> ShardPayload::from_shard(
    const Shard& shard) {
  if (shard.shard_id.empty())
    throw Error(Errc::invalid_shard, "shard id must not be empty");
  if (!shard.bbox.valid() || !shard.range.valid())
    throw Error(Errc::invalid_shard,
                "shard " + shard.shard_id + ": invalid bounds");

  auto p = std::make_shared<ShardPayload>();
  p->shard_id_ = shard.shard_id;
  p->bbox_ = shard.bbox;
  p->range_ = shard.range;

  std::set<std::string_view> names;
  for (const Tuple& t : shard.tuples) {
    if (!t.shard_id.empty() && t.shard_id != shard.shard_id)
      throw Error(Errc::invalid_shard,
                  "shard " + shard.shard_id + ": tuple tagged " + t.shard_id);
    if (!shard.range.contains(t.timestamp))
      throw Error(Errc::invalid_shard, "shard " + shard.shard_id +
                                           ": tuple outside temporal range");
    if (!shard.bbox.contains(t.location))
      throw Error(Errc::invalid_shard, "shard " + shard.shard_id +
                                           ": tuple outside bounding box");
    for (const auto& [name, v] : t.fields) {
      if (std::isnan(v))
        throw Error(Errc::invalid_shard,
                    "shard " + shard.shard_id + ": NaN value for " + name);
      names.insert(name);
    }
  }
  p->field_names_.assign(names.begin(), names.end());

  const std::size_t n = shard.tuples.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return shard.tuples[a].timestamp <
                            shard.tuples[b].timestamp;
                   });

  const std::size_t nf = p->field_names_.size();
  p->timestamps_.reserve(n);
  p->lats_.reserve(n);
  p->lons_.reserve(n);
  p->ordinals_.reserve(n);
  p->values_.assign(n * nf, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t row = 0; row < n; ++row) {
    const Tuple& t = shard.tuples[order[row]];
    p->timestamps_.push_back(t.timestamp);
    p->lats_.push_back(t.location.lat);
    p->lons_.push_back(t.location.lon);
    p->ordinals_.push_back(order[row]);
    for (const auto& [name, v] : t.fields) {
      const auto it = std::lower_bound(p->field_names_.begin(),
                                       p->field_names_.end(), name);
      p->values_[row * nf + static_cast<std::size_t>(
                                 it - p->field_names_.begin())] = v;
    }
  }

  std::size_t bytes = 0;
  for (const Tuple& t : shard.tuples) bytes += encode_tuple(t).size() + 1;
  p->wire_bytes_ = bytes;
  return p;
}

std::size_t ShardPayload::field_index(std::string_view name) const noexcept {
  const auto it =
      std::lower_bound(field_names_.begin(), field_names_.end(), name);
  if (it == field_names_.end() || *it != name) return npos;
  return static_cast<std::size_t>(it - field_names_.begin());
}

Tuple ShardPayload::tuple(std::size_t row) const {
  Tuple t;
  t.timestamp = timestamps_[row];
  t.location = location(row);
  t.shard_id = shard_id_;
  for (std::size_t f = 0; f < field_names_.size(); ++f) {
    const double v = value(row, f);
    if (!std::isnan(v)) t.fields.emplace(field_names_[f], v);
  }
  return t;
}

std::vector<Tuple> ShardPayload::tuples_in_original_order() const {
  std::vector<Tuple> out(size());
  for (std::size_t row = 0; row < size(); ++row) out[ordinals_[row]] = tuple(row);
  return out;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_number(std::string& out, std::int64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view s, std::size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error(Errc::parse_error, "line " + std::to_string(line) +
                                       ": bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string encode_tuple(const Tuple& t) {
  std::string out;
  append_number(out, t.timestamp);
  out += ',';
  append_number(out, t.location.lat);
  out += ',';
  append_number(out, t.location.lon);
  for (const auto& [name, v] : t.fields) {
    out += ',';
    out += name;
    out += '=';
    append_number(out, v);
  }
  return out;
}

std::string encode_tuples(const std::vector<Tuple>& tuples) {
  std::string out;
  for (const Tuple& t : tuples) {
    out += encode_tuple(t);
    out += '\n';
  }
  return out;
}

std::vector<Tuple> decode_tuples(std::string_view text,
                                 std::string_view shard_id) {
  std::vector<Tuple> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      parts.push_back(line.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (parts.size() < 3)
      throw Error(Errc::parse_error,
                  "line " + std::to_string(line_no) + ": expected timestamp,lat,lon");
    Tuple t;
    t.shard_id = std::string(shard_id);
    t.timestamp = parse_number<std::int64_t>(parts[0], line_no);
    t.location.lat = parse_number<double>(parts[1], line_no);
    t.location.lon = parse_number<double>(parts[2], line_no);
    for (std::size_t i = 3; i < parts.size(); ++i) {
      const std::size_t eq = parts[i].find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw Error(Errc::parse_error, "line " + std::to_string(line_no) +
                                           ": expected field=value");
      t.fields.emplace(std::string(parts[i].substr(0, eq)),
                       parse_number<double>(parts[i].substr(eq + 1), line_no));
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace aerialdb
