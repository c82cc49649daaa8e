# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Python bindings for the AerialDB simulator core."""

from ._aerialdb import (
    PROTOCOL_VERSION,
    AerialDBError,
    Cluster,
    RunResult,
    format_config,
    hash_id,
    locate,
    plan,
    run_failure,
    run_insert,
    run_query,
    verify,
    xxh64,
)

__all__ = [
    "PROTOCOL_VERSION",
    "AerialDBError",
    "Cluster",
    "RunResult",
    "format_config",
    "hash_id",
    "locate",
    "plan",
    "run_failure",
    "run_insert",
    "run_query",
    "verify",
    "xxh64",
]
