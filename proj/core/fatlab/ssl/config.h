// fatlab/ssl/config.h

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

#ifndef FATLAB_SSL_CONFIG_H_
#define FATLAB_SSL_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fatlab/util/check.h"

namespace fatlab {
namespace ssl {

// The encoder consumes 16 kHz waveforms and must downsample by exactly this
// factor so its frames line up with the 50 Hz cluster targets.
constexpr int64_t kDownsample = 320;

struct ConvLayerSpec {
  int64_t channels = 0;
  int64_t kernel = 0;
  int64_t stride = 0;
};

struct EncoderConfig {
  std::vector<ConvLayerSpec> conv;
  int64_t num_blocks = 2;
  int64_t model_dim = 64;
  int64_t num_heads = 2;
  int64_t ffn_dim = 128;
  int64_t num_classes = 32;  // prediction head size K
  int64_t max_frames = 256;  // learned positional table length

  // Desk-scale defaults: a six-layer conv stack with total stride 320 in
  // front of two transformer blocks.
  static EncoderConfig Desk() {
    EncoderConfig c;
    c.conv = {{16, 10, 5}, {16, 8, 4}, {32, 4, 2}, {32, 4, 2}, {64, 4, 2}, {64, 2, 2}};
    return c;
  }
};

enum class FusionVariant { kOA, kSF, kDA };
enum class FusionPlacement { kFirst, kLast, kAll };

struct FusionConfig {
  FusionVariant variant = FusionVariant::kOA;
  FusionPlacement placement = FusionPlacement::kFirst;
};

struct MaskingConfig {
  double mask_prob = 0.065;  // per-frame span-start probability
  int64_t span_length = 10;  // frames per span
  int64_t min_masks = 1;     // force one span when nothing fires
};

inline const char *ToString(FusionVariant v) {
  switch (v) {
    case FusionVariant::kOA: return "oa";
    case FusionVariant::kSF: return "sf";
    case FusionVariant::kDA: return "da";
  }
  FATLAB_ERR << "bad fusion variant value";
}

inline const char *ToString(FusionPlacement p) {
  switch (p) {
    case FusionPlacement::kFirst: return "first";
    case FusionPlacement::kLast: return "last";
    case FusionPlacement::kAll: return "all";
  }
  FATLAB_ERR << "bad fusion placement value";
}

inline FusionVariant VariantFromString(const std::string &s) {
  if (s == "oa") return FusionVariant::kOA;
  if (s == "sf") return FusionVariant::kSF;
  if (s == "da") return FusionVariant::kDA;
  FATLAB_ERR << "unknown fusion variant '" << s << "' (expected oa|sf|da)";
}

inline FusionPlacement PlacementFromString(const std::string &s) {
  if (s == "first") return FusionPlacement::kFirst;
  if (s == "last") return FusionPlacement::kLast;
  if (s == "all") return FusionPlacement::kAll;
  FATLAB_ERR << "unknown fusion placement '" << s << "' (expected first|last|all)";
}

// Block indices after which fusion happens: First = after block 0, Last =
// after the final block, All = after every block.
inline std::vector<int64_t> FusionSites(FusionPlacement p, int64_t num_blocks) {
  FATLAB_CHECK(num_blocks >= 1) << "(fusion sites on a " << num_blocks << "-block model)";
  switch (p) {
    case FusionPlacement::kFirst: return {0};
    case FusionPlacement::kLast: return {num_blocks - 1};
    case FusionPlacement::kAll: {
      std::vector<int64_t> all(static_cast<size_t>(num_blocks));
      for (int64_t i = 0; i < num_blocks; ++i) all[static_cast<size_t>(i)] = i;
      return all;
    }
  }
  FATLAB_ERR << "bad fusion placement value";
}

// Trainable scalars one fusion site introduces.
inline int64_t FusionParamsPerSite(FusionVariant v, int64_t dim) {
  switch (v) {
    case FusionVariant::kOA: return 1;
    case FusionVariant::kSF: return 2 * dim * dim + dim;
    case FusionVariant::kDA: return 4 * dim * dim + 4 * dim;
  }
  FATLAB_ERR << "bad fusion variant value";
}

}  // namespace ssl
}  // namespace fatlab

#endif  // FATLAB_SSL_CONFIG_H_
