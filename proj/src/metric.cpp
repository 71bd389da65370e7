// Copyright 2026 The regal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "regal/metric.hpp"

#include <algorithm>
#include <cmath>

namespace regal {

ErrorStats stats_from_distances(std::span<const double> distances) {
  ErrorStats s;
  s.count = distances.size();
  if (distances.empty()) return s;
  double sq = 0.0, sum = 0.0;
  for (double d : distances) {
    sq += d * d;
    sum += d;
  }
  const auto n = static_cast<double>(distances.size());
  s.nmse_mm2 = sq / n;
  s.rms_mm = std::sqrt(s.nmse_mm2);
  s.mean_mm = sum / n;
  return s;
}

std::vector<double> correspondence_distances(const TriangleMesh& source, const CorrespondenceMap& map,
                                             const TriangleMesh& target) {
  const std::vector<Vec3> mapped = map_target_coordinates(map, target);
  std::vector<double> d;
  d.reserve(mapped.size());
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    const Index v = map.entries()[i].source_vertex;
    if (v >= source.vertex_count())
      fail(ErrorCode::InvalidArgument, "map references source vertex " + std::to_string(v) + " out of range");
    d.push_back((source.vertex(v) - mapped[i]).norm());
  }
  return d;
}

double nmse(const TriangleMesh& source, const CorrespondenceMap& map, const TriangleMesh& target) {
  if (map.empty()) fail(ErrorCode::Empty, "nmse over an empty vertex subset");
  const std::vector<Vec3> mapped = map_target_coordinates(map, target);
  double sq = 0.0;
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    const Index v = map.entries()[i].source_vertex;
    if (v >= source.vertex_count())
      fail(ErrorCode::InvalidArgument, "map references source vertex " + std::to_string(v) + " out of range");
    sq += (source.vertex(v) - mapped[i]).squaredNorm();
  }
  return sq / static_cast<double>(mapped.size());
}

double nmse(const TriangleMesh& source, std::span<const Index> subset, const CorrespondenceMap& map,
            const TriangleMesh& target) {
  std::vector<Index> want(subset.begin(), subset.end());
  std::vector<Index> have;
  have.reserve(map.size());
  for (const auto& e : map.entries()) have.push_back(e.source_vertex);
  std::sort(want.begin(), want.end());
  std::sort(have.begin(), have.end());
  if (want != have) fail(ErrorCode::InvalidArgument, "correspondence map does not cover exactly the requested vertex subset");
  return nmse(source, map, target);
}

ErrorStats error_stats(const TriangleMesh& source, const CorrespondenceMap& map, const TriangleMesh& target) {
  if (map.empty()) fail(ErrorCode::Empty, "error statistics over an empty vertex subset");
  const std::vector<double> d = correspondence_distances(source, map, target);
  ErrorStats s = stats_from_distances(d);
  s.nmse_mm2 = nmse(source, map, target);
  return s;
}

}  // namespace regal
