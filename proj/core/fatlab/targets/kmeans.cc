// fatlab/targets/kmeans.cc

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

#include "fatlab/targets/kmeans.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "fatlab/numerics/rng.h"
#include "fatlab/util/check.h"

namespace fatlab {
namespace targets {

namespace {

constexpr char kMagic[4] = {'F', 'A', 'T', 'K'};
constexpr uint32_t kVersion = 1;

double RowDist2(const double *a, const double *b, int64_t dim) {
  double s = 0.0;
  for (int64_t i = 0; i < dim; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int64_t CountDistinctRows(const numerics::Tensor &data) {
  int64_t rows = data.shape()[0];
  int64_t dim = data.shape()[1];
  const double *p = data.data();
  std::vector<int64_t> order(static_cast<size_t>(rows));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [=](int64_t a, int64_t b) {
    return std::lexicographical_compare(p + a * dim, p + (a + 1) * dim,
                                        p + b * dim, p + (b + 1) * dim);
  });
  int64_t distinct = rows == 0 ? 0 : 1;
  for (int64_t i = 1; i < rows; ++i) {
    if (std::memcmp(p + order[i - 1] * dim, p + order[i] * dim,
                    sizeof(double) * static_cast<size_t>(dim)) != 0) {
      ++distinct;
    }
  }
  return distinct;
}

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

void ReadExact(std::ifstream &in, char *dst, size_t n, const std::string &path) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    FATLAB_ERR << "codebook: truncated file: " << path;
  }
}

}  // namespace

Codebook KmeansFit(const numerics::Tensor &data, const KmeansOptions &opts) {
  FATLAB_CHECK(data.rank() == 2) << "(kmeans expects [rows, dim] data, got "
                                 << data.ShapeStr() << ")";
  int64_t rows = data.shape()[0];
  int64_t dim = data.shape()[1];
  int64_t k = opts.k;
  FATLAB_CHECK(rows >= 1 && dim >= 1) << "(kmeans on empty data)";
  FATLAB_CHECK(k >= 1) << "(kmeans needs k >= 1, got " << k << ")";
  FATLAB_CHECK(opts.max_iters >= 1)
      << "(kmeans needs max_iters >= 1, got " << opts.max_iters << ")";
  FATLAB_CHECK(data.AllFinite()) << "(kmeans input has non-finite entries)";

  int64_t distinct = CountDistinctRows(data);
  if (k > distinct) {
    FATLAB_ERR << "kmeans: k = " << k << " exceeds the " << distinct
               << " distinct rows in the data";
  }

  const double *p = data.data();
  numerics::Tensor centroids({k, dim});
  double *c = centroids.data();

  if (opts.init.numel() > 0) {
    FATLAB_CHECK(opts.init.rank() == 2 && opts.init.shape()[0] == k &&
                 opts.init.shape()[1] == dim)
        << "(init centroids " << opts.init.ShapeStr() << " do not match [" << k
        << ", " << dim << "])";
    FATLAB_CHECK(opts.init.AllFinite()) << "(init centroids have non-finite entries)";
    std::memcpy(c, opts.init.data(), sizeof(double) * static_cast<size_t>(k * dim));
  } else {
    // k-means++: first centroid uniform, then D^2-weighted draws. Rows at
    // distance zero from a chosen centroid carry no weight, so the seeding
    // never repeats a position; the distinct-row precheck guarantees the
    // total weight stays positive until all k are placed.
    numerics::Rng rng = numerics::Rng::Derive(opts.seed, numerics::Rng::kKmeans);
    int64_t first = rng.UniformInt(rows);
    std::memcpy(c, p + first * dim, sizeof(double) * static_cast<size_t>(dim));
    std::vector<double> d2(static_cast<size_t>(rows));
    for (int64_t i = 0; i < rows; ++i) d2[static_cast<size_t>(i)] = RowDist2(p + i * dim, c, dim);
    for (int64_t cc = 1; cc < k; ++cc) {
      double total = 0.0;
      for (int64_t i = 0; i < rows; ++i) total += d2[static_cast<size_t>(i)];
      double u = rng.Uniform() * total;
      int64_t pick = -1;
      int64_t last_positive = -1;
      double cum = 0.0;
      for (int64_t i = 0; i < rows; ++i) {
        if (d2[static_cast<size_t>(i)] <= 0.0) continue;
        last_positive = i;
        cum += d2[static_cast<size_t>(i)];
        if (cum > u) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = last_positive;
      FATLAB_CHECK(pick >= 0) << "(kmeans++ ran out of candidate rows)";
      double *dst = c + cc * dim;
      std::memcpy(dst, p + pick * dim, sizeof(double) * static_cast<size_t>(dim));
      for (int64_t i = 0; i < rows; ++i) {
        double d = RowDist2(p + i * dim, dst, dim);
        if (d < d2[static_cast<size_t>(i)]) d2[static_cast<size_t>(i)] = d;
      }
    }
  }

  Codebook out;
  out.seed = opts.seed;

  std::vector<int64_t> assign(static_cast<size_t>(rows), -1);
  std::vector<int64_t> prev(static_cast<size_t>(rows), -1);
  std::vector<int64_t> counts(static_cast<size_t>(k));
  std::vector<double> sums(static_cast<size_t>(k * dim));
  std::vector<double> old(static_cast<size_t>(k * dim));

  for (int64_t iter = 0; iter < opts.max_iters; ++iter) {
    // Assignment pass. Strict < keeps ties at the lowest index.
    double inertia = 0.0;
    for (int64_t i = 0; i < rows; ++i) {
      const double *row = p + i * dim;
      int64_t best = 0;
      double best_d = RowDist2(row, c, dim);
      for (int64_t cc = 1; cc < k; ++cc) {
        double d = RowDist2(row, c + cc * dim, dim);
        if (d < best_d) {
          best_d = d;
          best = cc;
        }
      }
      assign[static_cast<size_t>(i)] = best;
      inertia += best_d;
    }
    out.inertia_history.push_back(inertia);
    if (assign == prev) break;
    prev = assign;

    // Update pass: means per cluster.
    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.begin(), sums.end(), 0.0);
    for (int64_t i = 0; i < rows; ++i) {
      int64_t cc = assign[static_cast<size_t>(i)];
      ++counts[static_cast<size_t>(cc)];
      const double *row = p + i * dim;
      double *s = sums.data() + cc * dim;
      for (int64_t j = 0; j < dim; ++j) s[j] += row[j];
    }
    std::memcpy(old.data(), c, sizeof(double) * static_cast<size_t>(k * dim));
    for (int64_t cc = 0; cc < k; ++cc) {
      if (counts[static_cast<size_t>(cc)] == 0) continue;
      double inv = 1.0 / static_cast<double>(counts[static_cast<size_t>(cc)]);
      const double *s = sums.data() + cc * dim;
      double *dst = c + cc * dim;
      for (int64_t j = 0; j < dim; ++j) dst[j] = s[j] * inv;
    }

    // Re-seed clusters that ended the update empty or exactly coincident
    // with a lower-indexed centroid (the tie rule would starve them
    // forever). Each takes the farthest point from its previous centroid;
    // points are claimed so two re-seeds cannot land on the same row. The
    // surviving copy of a collided pair keeps serving its points, so the
    // next assignment pass can only lower the inertia.
    std::vector<char> claimed(static_cast<size_t>(rows), 0);
    for (int64_t cc = 0; cc < k; ++cc) {
      bool reseed = counts[static_cast<size_t>(cc)] == 0;
      for (int64_t c2 = 0; !reseed && c2 < cc; ++c2) {
        reseed = std::memcmp(c + cc * dim, c + c2 * dim,
                             sizeof(double) * static_cast<size_t>(dim)) == 0;
      }
      if (!reseed) continue;
      int64_t far = -1;
      double far_d = -1.0;
      const double *prev_c = old.data() + cc * dim;
      for (int64_t i = 0; i < rows; ++i) {
        if (claimed[static_cast<size_t>(i)]) continue;
        double d = RowDist2(p + i * dim, prev_c, dim);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      FATLAB_CHECK(far >= 0) << "(kmeans re-seed found no free row)";
      claimed[static_cast<size_t>(far)] = 1;
      std::memcpy(c + cc * dim, p + far * dim, sizeof(double) * static_cast<size_t>(dim));
    }
  }

  out.centroids = std::move(centroids);
  return out;
}

std::vector<int64_t> Assign(const numerics::Tensor &data,
                            const numerics::Tensor &centroids) {
  FATLAB_CHECK(data.rank() == 2 && centroids.rank() == 2)
      << "(assign expects [rows, dim] data and [k, dim] centroids, got "
      << data.ShapeStr() << " and " << centroids.ShapeStr() << ")";
  if (data.shape()[1] != centroids.shape()[1]) {
    FATLAB_ERR << "assign: feature dim " << data.shape()[1]
               << " does not match codebook dim " << centroids.shape()[1];
  }
  int64_t rows = data.shape()[0];
  int64_t dim = data.shape()[1];
  int64_t k = centroids.shape()[0];
  FATLAB_CHECK(k >= 1) << "(assign with empty codebook)";
  const double *p = data.data();
  const double *c = centroids.data();
  std::vector<int64_t> ids(static_cast<size_t>(rows));
  for (int64_t i = 0; i < rows; ++i) {
    const double *row = p + i * dim;
    int64_t best = 0;
    double best_d = RowDist2(row, c, dim);
    for (int64_t cc = 1; cc < k; ++cc) {
      double d = RowDist2(row, c + cc * dim, dim);
      if (d < best_d) {
        best_d = d;
        best = cc;
      }
    }
    ids[static_cast<size_t>(i)] = best;
  }
  return ids;
}

double Inertia(const numerics::Tensor &data, const numerics::Tensor &centroids,
               const std::vector<int64_t> &assignments) {
  FATLAB_CHECK(data.rank() == 2 && centroids.rank() == 2 &&
               data.shape()[1] == centroids.shape()[1])
      << "(inertia shape mismatch: " << data.ShapeStr() << " vs "
      << centroids.ShapeStr() << ")";
  FATLAB_CHECK(static_cast<int64_t>(assignments.size()) == data.shape()[0])
      << "(inertia got " << assignments.size() << " assignments for "
      << data.shape()[0] << " rows)";
  int64_t dim = data.shape()[1];
  int64_t k = centroids.shape()[0];
  double total = 0.0;
  for (size_t i = 0; i < assignments.size(); ++i) {
    int64_t cc = assignments[i];
    FATLAB_CHECK(cc >= 0 && cc < k) << "(assignment id " << cc << " out of [0, " << k << "))";
    total += RowDist2(data.data() + static_cast<int64_t>(i) * dim,
                      centroids.data() + cc * dim, dim);
  }
  return total;
}

void SaveCodebook(const std::string &path, const Codebook &codebook) {
  FATLAB_CHECK(codebook.centroids.rank() == 2 && codebook.centroids.numel() > 0)
      << "(refusing to save empty codebook)";
  int64_t k = codebook.k();
  int64_t dim = codebook.dim();
  std::string buf;
  buf.append(kMagic, 4);
  PutU32(&buf, kVersion);
  PutU64(&buf, static_cast<uint64_t>(k));
  PutU64(&buf, static_cast<uint64_t>(dim));
  const double *c = codebook.centroids.data();
  for (int64_t i = 0; i < k * dim; ++i) {
    uint64_t bits = 0;
    std::memcpy(&bits, &c[i], sizeof(bits));
    PutU64(&buf, bits);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FATLAB_ERR << "codebook: cannot open for write: " << path;
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) FATLAB_ERR << "codebook: write failed: " << path;

  nlohmann::json side;
  side["K"] = k;
  side["dim"] = dim;
  side["source"] = codebook.source;
  side["seed"] = codebook.seed;
  side["inertia_history"] = codebook.inertia_history;
  std::ofstream js(path + ".json", std::ios::trunc);
  if (!js) FATLAB_ERR << "codebook: cannot open sidecar for write: " << path << ".json";
  js << side.dump(2) << "\n";
}

Codebook LoadCodebook(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FATLAB_ERR << "codebook: cannot open: " << path;
  char head[4 + 4 + 8 + 8];
  ReadExact(in, head, sizeof(head), path);
  if (std::memcmp(head, kMagic, 4) != 0) {
    FATLAB_ERR << "codebook: bad magic in " << path;
  }
  uint32_t version = GetU32(head + 4);
  if (version != kVersion) {
    FATLAB_ERR << "codebook: unsupported version " << version << " in " << path;
  }
  int64_t k = static_cast<int64_t>(GetU64(head + 8));
  int64_t dim = static_cast<int64_t>(GetU64(head + 16));
  FATLAB_CHECK(k >= 1 && dim >= 1) << "(codebook header k = " << k << ", dim = "
                                   << dim << " in " << path << ")";

  Codebook cb;
  cb.centroids = numerics::Tensor({k, dim});
  std::vector<char> payload(static_cast<size_t>(k * dim) * 8);
  ReadExact(in, payload.data(), payload.size(), path);
  double *c = cb.centroids.data();
  for (int64_t i = 0; i < k * dim; ++i) {
    uint64_t bits = GetU64(payload.data() + i * 8);
    std::memcpy(&c[i], &bits, sizeof(bits));
  }

  std::ifstream js(path + ".json");
  if (!js) FATLAB_ERR << "codebook: missing sidecar: " << path << ".json";
  nlohmann::json side;
  try {
    js >> side;
  } catch (const std::exception &e) {
    FATLAB_ERR << "codebook: bad sidecar " << path << ".json: " << e.what();
  }
  if (side.value("K", int64_t{-1}) != k || side.value("dim", int64_t{-1}) != dim) {
    FATLAB_ERR << "codebook: sidecar K/dim disagree with binary header in " << path;
  }
  cb.source = side.value("source", std::string());
  cb.seed = side.value("seed", uint64_t{0});
  if (side.contains("inertia_history")) {
    cb.inertia_history = side["inertia_history"].get<std::vector<double>>();
  }
  return cb;
}

}  // namespace targets
}  // namespace fatlab
