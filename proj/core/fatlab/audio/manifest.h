// fatlab/audio/manifest.h

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

#ifndef FATLAB_AUDIO_MANIFEST_H_
#define FATLAB_AUDIO_MANIFEST_H_

#include <cmath>
#include <string>
#include <vector>

namespace fatlab {
namespace audio {

// One JSON-lines manifest row. `audio` is relative to the manifest file's
// directory; ResolveAudioPath joins them. Optional fields stay at their
// defaults when the key is absent (snr_db: NaN, rescale: 1).
struct ManifestEntry {
  std::string id;
  std::string audio;
  std::string transcript;
  double snr_db = std::nan("");
  std::string noise_id;
  double rescale = 1.0;

  bool has_snr() const { return !std::isnan(snr_db); }
};

std::vector<ManifestEntry> ReadManifest(const std::string &path);
void WriteManifest(const std::string &path, const std::vector<ManifestEntry> &entries);

// Joins an entry's audio field with the manifest's directory. Absolute audio
// paths pass through unchanged.
std::string ResolveAudioPath(const std::string &manifest_path, const std::string &audio);

}  // namespace audio
}  // namespace fatlab

#endif  // FATLAB_AUDIO_MANIFEST_H_
