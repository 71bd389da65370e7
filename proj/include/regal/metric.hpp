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

#pragma once

#include <span>
#include <vector>

#include "regal/mesh.hpp"

namespace regal {

/// Summary of a set of point-to-point distances.
struct ErrorStats {
  double nmse_mm2 = 0.0;  // mean squared distance
  double rms_mm = 0.0;    // sqrt(nmse_mm2)
  double mean_mm = 0.0;   // mean distance
  std::size_t count = 0;
};

ErrorStats stats_from_distances(std::span<const double> distances);

/// Distance |v - T(v)| for every map entry, in entry order.
std::vector<double> correspondence_distances(const TriangleMesh& source, const CorrespondenceMap& map,
                                             const TriangleMesh& target);

/// Mean squared distance (mm^2) between source vertices and their mapped
/// positions on target. The evaluated subset is the set of source vertices
/// the map covers. Throws Error(Empty) for an empty map.
double nmse(const TriangleMesh& source, const CorrespondenceMap& map, const TriangleMesh& target);

/// As above, additionally requiring the map to cover exactly `subset`.
double nmse(const TriangleMesh& source, std::span<const Index> subset, const CorrespondenceMap& map,
            const TriangleMesh& target);

/// nmse together with RMS and mean distance over the same correspondences.
ErrorStats error_stats(const TriangleMesh& source, const CorrespondenceMap& map, const TriangleMesh& target);

}  // namespace regal
