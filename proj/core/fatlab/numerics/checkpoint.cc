// fatlab/numerics/checkpoint.cc

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

#include "fatlab/numerics/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "fatlab/util/check.h"

namespace fatlab {
namespace numerics {

namespace {

constexpr char kMagic[4] = {'F', 'A', 'T', 'L'};
constexpr uint32_t kVersion = 1;

void PutU16(std::string *buf, uint16_t v) {
  buf->push_back(static_cast<char>(v & 0xff));
  buf->push_back(static_cast<char>((v >> 8) & 0xff));
}

void PutU32(std::string *buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string *buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t GetU64(const char *p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

uint32_t GetU32(const char *p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

uint16_t GetU16(const char *p) {
  return static_cast<uint16_t>(static_cast<unsigned char>(p[0]) |
                               (static_cast<unsigned char>(p[1]) << 8));
}

void ReadExact(std::ifstream &in, char *dst, size_t n, const std::string &path) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    FATLAB_ERR << "checkpoint: truncated file: " << path;
  }
}

}  // namespace

void ParamRegistry::Register(const std::string &name, Var param) {
  FATLAB_CHECK(!name.empty() && name.size() <= 65535) << "(bad parameter name '" << name << "')";
  FATLAB_CHECK(param != nullptr) << "(null parameter '" << name << "')";
  if (Has(name)) {
    FATLAB_ERR << "checkpoint: duplicate parameter name '" << name << "'";
  }
  if (param->name.empty()) param->name = name;
  entries_.emplace_back(name, std::move(param));
}

bool ParamRegistry::Has(const std::string &name) const {
  for (const auto &e : entries_) {
    if (e.first == name) return true;
  }
  return false;
}

Var ParamRegistry::Get(const std::string &name) const {
  for (const auto &e : entries_) {
    if (e.first == name) return e.second;
  }
  FATLAB_ERR << "checkpoint: no parameter named '" << name << "'";
  return nullptr;
}

std::vector<Var> ParamRegistry::Params() const {
  std::vector<Var> out;
  out.reserve(entries_.size());
  for (const auto &e : entries_) out.push_back(e.second);
  return out;
}

int64_t ParamRegistry::TotalScalars() const {
  int64_t n = 0;
  for (const auto &e : entries_) n += e.second->value.numel();
  return n;
}

void ParamRegistry::Save(const std::string &path) const {
  // Entry table size must be known before offsets can be assigned.
  uint64_t header_size = 4 + 4 + 8;
  for (const auto &e : entries_) {
    header_size += 2 + e.first.size() + 1 + 8 * static_cast<uint64_t>(e.second->value.rank()) + 8;
  }

  std::string buf;
  buf.reserve(header_size);
  buf.append(kMagic, 4);
  PutU32(&buf, kVersion);
  PutU64(&buf, static_cast<uint64_t>(entries_.size()));
  uint64_t offset = header_size;
  for (const auto &e : entries_) {
    const Tensor &t = e.second->value;
    PutU16(&buf, static_cast<uint16_t>(e.first.size()));
    buf.append(e.first);
    buf.push_back(static_cast<char>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) PutU64(&buf, static_cast<uint64_t>(t.dim(i)));
    PutU64(&buf, offset);
    offset += 8 * static_cast<uint64_t>(t.numel());
  }
  FATLAB_CHECK(buf.size() == header_size) << "(checkpoint header accounting)";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    FATLAB_ERR << "checkpoint: cannot open for write: " << path;
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  std::string payload;
  for (const auto &e : entries_) {
    const Tensor &t = e.second->value;
    payload.clear();
    payload.reserve(static_cast<size_t>(t.numel()) * 8);
    for (int64_t i = 0; i < t.numel(); ++i) {
      PutU64(&payload, std::bit_cast<uint64_t>(t[i]));
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  out.flush();
  if (!out) {
    FATLAB_ERR << "checkpoint: write failed: " << path;
  }

  nlohmann::json meta;
  meta["format"] = "fatl-v1";
  meta["total_scalars"] = TotalScalars();
  meta["params"] = nlohmann::json::array();
  uint64_t off = header_size;
  for (const auto &e : entries_) {
    const Tensor &t = e.second->value;
    nlohmann::json p;
    p["name"] = e.first;
    p["shape"] = t.shape();
    p["offset"] = off;
    p["bytes"] = static_cast<uint64_t>(t.numel()) * 8;
    meta["params"].push_back(p);
    off += static_cast<uint64_t>(t.numel()) * 8;
  }
  std::ofstream side(path + ".json", std::ios::trunc);
  side << meta.dump(2) << "\n";
}

void ParamRegistry::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    FATLAB_ERR << "checkpoint: cannot open: " << path;
  }
  char head[16];
  ReadExact(in, head, 16, path);
  if (std::memcmp(head, kMagic, 4) != 0) {
    FATLAB_ERR << "checkpoint: bad magic in " << path;
  }
  uint32_t version = GetU32(head + 4);
  if (version != kVersion) {
    FATLAB_ERR << "checkpoint: unsupported version " << version << " in " << path;
  }
  uint64_t count = GetU64(head + 8);

  struct FileEntry {
    std::string name;
    std::vector<int64_t> dims;
    uint64_t offset;
  };
  std::vector<FileEntry> file_entries;
  file_entries.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    char lenbuf[2];
    ReadExact(in, lenbuf, 2, path);
    uint16_t name_len = GetU16(lenbuf);
    FileEntry fe;
    fe.name.resize(name_len);
    ReadExact(in, fe.name.data(), name_len, path);
    char ndim_c;
    ReadExact(in, &ndim_c, 1, path);
    int ndim = static_cast<unsigned char>(ndim_c);
    fe.dims.resize(static_cast<size_t>(ndim));
    for (int d = 0; d < ndim; ++d) {
      char dimbuf[8];
      ReadExact(in, dimbuf, 8, path);
      fe.dims[static_cast<size_t>(d)] = static_cast<int64_t>(GetU64(dimbuf));
    }
    char offbuf[8];
    ReadExact(in, offbuf, 8, path);
    fe.offset = GetU64(offbuf);
    file_entries.push_back(std::move(fe));
  }

  std::vector<bool> filled(entries_.size(), false);
  for (const FileEntry &fe : file_entries) {
    size_t idx = entries_.size();
    for (size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].first == fe.name) {
        idx = i;
        break;
      }
    }
    if (idx == entries_.size()) {
      FATLAB_ERR << "checkpoint: entry '" << fe.name << "' in " << path
                 << " is not a registered parameter";
    }
    Tensor &t = entries_[idx].second->value;
    if (t.shape() != fe.dims) {
      FATLAB_ERR << "checkpoint: shape mismatch for '" << fe.name << "': file "
                 << ShapeStr(fe.dims) << " vs registered " << t.ShapeStr();
    }
    in.seekg(static_cast<std::streamoff>(fe.offset));
    std::vector<char> raw(static_cast<size_t>(t.numel()) * 8);
    ReadExact(in, raw.data(), raw.size(), path);
    for (int64_t j = 0; j < t.numel(); ++j) {
      t[j] = std::bit_cast<double>(GetU64(raw.data() + j * 8));
    }
    filled[idx] = true;
  }
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (!filled[i]) {
      FATLAB_ERR << "checkpoint: parameter '" << entries_[i].first << "' missing from " << path;
    }
  }
}

}  // namespace numerics
}  // namespace fatlab
