// fatlab/targets/store.cc

// Copyright 2026  FATLab Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fatlab/targets/store.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "fatlab/util/check.h"

namespace fatlab {
namespace targets {

namespace {

constexpr char kMagic[4] = {'F', 'A', 'T', 'T'};
constexpr uint32_t kVersion = 1;

void PutU32(std::string *buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string *buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetU32(const char *p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

uint64_t GetU64(const char *p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

std::string TargetPath(const std::string &dir, const std::string &utt_id) {
  FATLAB_CHECK(!utt_id.empty()) << "(empty utterance id)";
  FATLAB_CHECK(utt_id.find('/') == std::string::npos &&
               utt_id.find('\\') == std::string::npos)
      << "(utterance id '" << utt_id << "' contains a path separator)";
  return (std::filesystem::path(dir) / (utt_id + ".tgt")).string();
}

void SaveTargetIds(const std::string &path, const std::vector<int64_t> &ids) {
  std::string buf;
  buf.append(kMagic, 4);
  PutU32(&buf, kVersion);
  PutU64(&buf, static_cast<uint64_t>(ids.size()));
  for (int64_t id : ids) {
    FATLAB_CHECK(id >= 0 && id <= 0xffffffffll)
        << "(target id " << id << " out of range for storage)";
    PutU32(&buf, static_cast<uint32_t>(id));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FATLAB_ERR << "targets: cannot open for write: " << path;
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) FATLAB_ERR << "targets: write failed: " << path;
}

std::vector<int64_t> LoadTargetIds(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FATLAB_ERR << "targets: cannot open: " << path;
  char head[4 + 4 + 8];
  in.read(head, sizeof(head));
  if (static_cast<size_t>(in.gcount()) != sizeof(head)) {
    FATLAB_ERR << "targets: truncated file: " << path;
  }
  if (std::memcmp(head, kMagic, 4) != 0) {
    FATLAB_ERR << "targets: bad magic in " << path;
  }
  uint32_t version = GetU32(head + 4);
  if (version != kVersion) {
    FATLAB_ERR << "targets: unsupported version " << version << " in " << path;
  }
  uint64_t count = GetU64(head + 8);
  std::vector<char> payload(count * 4);
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<size_t>(in.gcount()) != payload.size()) {
    FATLAB_ERR << "targets: truncated file: " << path;
  }
  std::vector<int64_t> ids(count);
  for (uint64_t i = 0; i < count; ++i) {
    ids[i] = static_cast<int64_t>(GetU32(payload.data() + i * 4));
  }
  return ids;
}

}  // namespace targets
}  // namespace fatlab
