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

#include "aerialdb/errors.hpp"

namespace aerialdb {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::duplicate_site: return "duplicate_site";
    case Errc::site_outside_region: return "site_outside_region";
    case Errc::out_of_region: return "out_of_region";
    case Errc::before_epoch: return "before_epoch";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::invalid_config: return "invalid_config";
    case Errc::invalid_shard: return "invalid_shard";
    case Errc::insufficient_live_edges: return "insufficient_live_edges";
    case Errc::broadcast_query: return "broadcast_query";
    case Errc::unknown_destination: return "unknown_destination";
    case Errc::parse_error: return "parse_error";
  }
  return "unknown";
}

}  // namespace aerialdb
