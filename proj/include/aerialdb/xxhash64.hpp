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

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace aerialdb {

/// XXH64 (xxHash, 64-bit variant). Output matches the reference
/// implementation bit for bit on little- and big-endian hosts.
std::uint64_t xxh64(std::span<const std::byte> data, std::uint64_t seed = 0);

inline std::uint64_t xxh64(std::string_view s, std::uint64_t seed = 0) {
  return xxh64(std::as_bytes(std::span(s.data(), s.size())), seed);
}

/// Hash of a signed 64-bit integer encoded as 8 little-endian bytes.
std::uint64_t xxh64_int(std::int64_t v, std::uint64_t seed = 0);

}  // namespace aerialdb
