// fatlab/audio/manifest.cc

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

#include "fatlab/audio/manifest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "fatlab/util/check.h"

namespace fatlab {
namespace audio {

std::vector<ManifestEntry> ReadManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    FATLAB_ERR << "manifest: cannot open: " << path;
  }
  std::vector<ManifestEntry> entries;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      FATLAB_ERR << "manifest: " << path << ":" << lineno << ": bad JSON: " << e.what();
    }
    ManifestEntry e;
    if (!j.contains("id") || !j.contains("audio")) {
      FATLAB_ERR << "manifest: " << path << ":" << lineno << ": missing id or audio key";
    }
    e.id = j["id"].get<std::string>();
    e.audio = j["audio"].get<std::string>();
    if (j.contains("transcript")) e.transcript = j["transcript"].get<std::string>();
    if (j.contains("snr_db")) e.snr_db = j["snr_db"].get<double>();
    if (j.contains("noise_id")) e.noise_id = j["noise_id"].get<std::string>();
    if (j.contains("rescale")) e.rescale = j["rescale"].get<double>();
    entries.push_back(std::move(e));
  }
  return entries;
}

void WriteManifest(const std::string &path, const std::vector<ManifestEntry> &entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    FATLAB_ERR << "manifest: cannot open for write: " << path;
  }
  for (const ManifestEntry &e : entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["audio"] = e.audio;
    if (!e.transcript.empty()) j["transcript"] = e.transcript;
    if (e.has_snr()) j["snr_db"] = e.snr_db;
    if (!e.noise_id.empty()) j["noise_id"] = e.noise_id;
    if (e.rescale != 1.0) j["rescale"] = e.rescale;
    out << j.dump() << "\n";
  }
  if (!out) {
    FATLAB_ERR << "manifest: write failed: " << path;
  }
}

std::string ResolveAudioPath(const std::string &manifest_path, const std::string &audio) {
  std::filesystem::path a(audio);
  if (a.is_absolute()) return audio;
  return (std::filesystem::path(manifest_path).parent_path() / a).string();
}

}  // namespace audio
}  // namespace fatlab
