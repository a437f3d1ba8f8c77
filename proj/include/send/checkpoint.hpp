// Copyright (c) 2026 The send-diar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEND_CHECKPOINT_HPP_
#define SEND_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "send/params.hpp"

namespace send {

// Container layout:
//
//   SENDCKPT1\n
//   <entry count>\n
//   <name> <rows> <cols> <byte offset>\n     one line per entry
//   \n
//   <little-endian float64 payload>
//
// Offsets are relative to the first payload byte. Entries are stored in
// ParamStore order, rows major.
inline constexpr const char* kCheckpointMagic = "SENDCKPT1";

std::string encode_checkpoint(const ParamStore& params);
ParamStore decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path,
                     const ParamStore& params);
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace send

#endif  // SEND_CHECKPOINT_HPP_
