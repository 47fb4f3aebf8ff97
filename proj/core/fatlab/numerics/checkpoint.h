// fatlab/numerics/checkpoint.h

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

#ifndef FATLAB_NUMERICS_CHECKPOINT_H_
#define FATLAB_NUMERICS_CHECKPOINT_H_

#include <string>
#include <utility>
#include <vector>

#include "fatlab/numerics/autograd.h"

namespace fatlab {
namespace numerics {

// Named parameter collection with binary save/load.
//
// File layout ("fatl-v1", all integers little endian):
//   magic  "FATL"
//   u32    version (1)
//   u64    entry count
//   per entry: u16 name length, name bytes, u8 ndim, u64 dims..., u64 offset
//   payloads: raw little-endian float64, at the absolute offsets recorded in
//   the entry table, in registration order.
//
// Save also drops a human-readable JSON sidecar next to the file
// (path + ".json") listing names, shapes and byte offsets.
class ParamRegistry {
 public:
  // Names must be unique and non-empty. Registration order is the on-disk
  // order and the optimizer order, so keep it deterministic.
  void Register(const std::string &name, Var param);

  bool Has(const std::string &name) const;
  Var Get(const std::string &name) const;

  const std::vector<std::pair<std::string, Var>> &entries() const { return entries_; }
  std::vector<Var> Params() const;
  int64_t TotalScalars() const;

  void Save(const std::string &path) const;

  // Strict load: every file entry must match a registered parameter of the
  // same shape, and every registered parameter must be present in the file.
  void Load(const std::string &path);

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

}  // namespace numerics
}  // namespace fatlab

#endif  // FATLAB_NUMERICS_CHECKPOINT_H_
