// fatlab/frontends/pool.h

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

#ifndef FATLAB_FRONTENDS_POOL_H_
#define FATLAB_FRONTENDS_POOL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fatlab/numerics/rng.h"

namespace fatlab {
namespace frontends {

struct PoolEntry {
  std::string id;
  std::string checkpoint;  // path to the parameter file; sidecar at path + ".json"
};

// Ordered list of trained front-ends the augmentation stage samples from.
// Ids must be unique; order is part of the sampling contract.
struct FrontendPool {
  std::vector<PoolEntry> entries;
  uint64_t seed = 1;
};

// Uniform pick over the entries, consuming exactly one draw from rng.
// An empty pool fails.
const PoolEntry &PoolSample(const FrontendPool &pool, numerics::Rng *rng);

// JSON round trip for the pool description. Relative checkpoint paths are
// kept verbatim; ResolvePoolPath joins them against the pool file location.
void SavePool(const FrontendPool &pool, const std::string &path);
FrontendPool LoadPool(const std::string &path);
std::string ResolvePoolPath(const std::string &pool_path, const std::string &checkpoint);

// Fails unless every entry's checkpoint loads as a front-end whose id matches
// the pool entry. Called once before training uses a pool.
void VerifyPoolLoadable(const FrontendPool &pool, const std::string &pool_path);

}  // namespace frontends
}  // namespace fatlab

#endif  // FATLAB_FRONTENDS_POOL_H_
