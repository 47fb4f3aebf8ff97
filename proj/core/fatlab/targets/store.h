// fatlab/targets/store.h

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

#ifndef FATLAB_TARGETS_STORE_H_
#define FATLAB_TARGETS_STORE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace fatlab {
namespace targets {

// On-disk cluster targets: one small binary file of frame-aligned ids per
// utterance, named after the manifest id so lookups need no index file.

std::string TargetPath(const std::string &dir, const std::string &utt_id);

void SaveTargetIds(const std::string &path, const std::vector<int64_t> &ids);
std::vector<int64_t> LoadTargetIds(const std::string &path);

}  // namespace targets
}  // namespace fatlab

#endif  // FATLAB_TARGETS_STORE_H_
