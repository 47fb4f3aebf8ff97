// fatlab/frontends/pool.cc

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

#include "fatlab/frontends/pool.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "fatlab/frontends/enhancer.h"
#include "fatlab/util/check.h"
#include "json.hpp"

namespace fatlab {
namespace frontends {

namespace fs = std::filesystem;

const PoolEntry &PoolSample(const FrontendPool &pool, numerics::Rng *rng) {
  FATLAB_CHECK(rng != nullptr) << "(pool_sample: null rng)";
  FATLAB_CHECK(!pool.entries.empty()) << "(pool_sample: empty front-end pool)";
  int64_t pick = rng->UniformInt(static_cast<int64_t>(pool.entries.size()));
  return pool.entries[static_cast<size_t>(pick)];
}

void SavePool(const FrontendPool &pool, const std::string &path) {
  std::set<std::string> ids;
  for (const PoolEntry &e : pool.entries) {
    FATLAB_CHECK(!e.id.empty()) << "(pool entry with empty id)";
    FATLAB_CHECK(ids.insert(e.id).second) << "(duplicate pool id \"" << e.id << "\")";
  }
  nlohmann::json j;
  j["seed"] = pool.seed;
  j["entries"] = nlohmann::json::array();
  for (const PoolEntry &e : pool.entries) {
    j["entries"].push_back({{"id", e.id}, {"checkpoint", e.checkpoint}});
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::trunc);
  FATLAB_CHECK(out.good()) << "(cannot write pool file " << path << ")";
  out << j.dump(2) << "\n";
  FATLAB_CHECK(out.good()) << "(short write to " << path << ")";
}

FrontendPool LoadPool(const std::string &path) {
  std::ifstream in(path);
  FATLAB_CHECK(in.good()) << "(cannot read pool file " << path << ")";
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  FATLAB_CHECK(!j.is_discarded()) << "(pool file " << path << " is not valid JSON)";
  FATLAB_CHECK(j.contains("entries") && j["entries"].is_array())
      << "(pool file " << path << " has no entries array)";

  FrontendPool pool;
  pool.seed = j.value("seed", uint64_t{1});
  std::set<std::string> ids;
  for (const nlohmann::json &e : j["entries"]) {
    PoolEntry entry;
    entry.id = e.at("id").get<std::string>();
    entry.checkpoint = e.at("checkpoint").get<std::string>();
    FATLAB_CHECK(ids.insert(entry.id).second)
        << "(pool file " << path << ": duplicate id \"" << entry.id << "\")";
    pool.entries.push_back(std::move(entry));
  }
  return pool;
}

std::string ResolvePoolPath(const std::string &pool_path, const std::string &checkpoint) {
  fs::path p(checkpoint);
  if (p.is_absolute()) return checkpoint;
  return (fs::path(pool_path).parent_path() / p).string();
}

void VerifyPoolLoadable(const FrontendPool &pool, const std::string &pool_path) {
  FATLAB_CHECK(!pool.entries.empty()) << "(front-end pool is empty)";
  for (const PoolEntry &e : pool.entries) {
    std::string ckpt = ResolvePoolPath(pool_path, e.checkpoint);
    std::unique_ptr<Frontend> fe = LoadFrontend(ckpt);
    FATLAB_CHECK(fe->spec().id == e.id)
        << "(pool entry \"" << e.id << "\" loads a front-end named \"" << fe->spec().id
        << "\" from " << ckpt << ")";
  }
}

}  // namespace frontends
}  // namespace fatlab
