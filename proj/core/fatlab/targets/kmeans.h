// fatlab/targets/kmeans.h

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

#ifndef FATLAB_TARGETS_KMEANS_H_
#define FATLAB_TARGETS_KMEANS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fatlab/numerics/tensor.h"

namespace fatlab {
namespace targets {

struct KmeansOptions {
  int64_t k = 32;
  int64_t max_iters = 100;
  uint64_t seed = 1;
  // Optional warm start: [k, dim] centroids used in place of k-means++
  // seeding. Empty means seed from the data.
  numerics::Tensor init;
};

// A fitted cluster codebook. `source` tags where the training features came
// from ("mfcc" or "layer:<i>"). `inertia_history` holds the total squared
// distance after every assignment pass, so history.back() is the final
// inertia; the sequence is non-increasing by construction.
struct Codebook {
  numerics::Tensor centroids;  // [k, dim]
  std::string source;
  uint64_t seed = 0;
  std::vector<double> inertia_history;

  int64_t k() const { return centroids.numel() == 0 ? 0 : centroids.shape()[0]; }
  int64_t dim() const { return centroids.numel() == 0 ? 0 : centroids.shape()[1]; }
};

// Lloyd's algorithm with k-means++ seeding on the rows of `data` ([rows,
// dim]). Runs single-threaded so results are a pure function of (data, k,
// seed). Iterates to an assignment fixpoint or `max_iters` assignment
// passes, whichever comes first. A cluster that ends an update empty, or
// whose centroid collides exactly with a lower-indexed one, is re-seeded at
// the point farthest from its previous centroid; the returned codebook never
// contains duplicate centroids.
//
// Fails if data has fewer than k distinct rows, or on non-finite input.
// `source` is left empty for the caller to fill in.
Codebook KmeansFit(const numerics::Tensor &data, const KmeansOptions &opts);

// Nearest centroid per row under squared euclidean distance. Ties break
// toward the lowest centroid index. Fails on dimension mismatch.
std::vector<int64_t> Assign(const numerics::Tensor &data,
                            const numerics::Tensor &centroids);

// Total squared distance of each row to its assigned centroid.
double Inertia(const numerics::Tensor &data, const numerics::Tensor &centroids,
               const std::vector<int64_t> &assignments);

// Codebook container: a flat binary centroid matrix next to a JSON sidecar
// (path + ".json") holding {K, dim, source, seed, inertia_history}. Load
// validates the sidecar against the binary header.
void SaveCodebook(const std::string &path, const Codebook &codebook);
Codebook LoadCodebook(const std::string &path);

}  // namespace targets
}  // namespace fatlab

#endif  // FATLAB_TARGETS_KMEANS_H_
