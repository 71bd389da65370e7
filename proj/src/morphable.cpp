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

#include "regal/morphable.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "regal/io.hpp"

namespace regal {
namespace {

constexpr char kMagic[8] = {'R', 'E', 'G', 'A', 'L', 'P', 'C', 'A'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "basis container I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& data, std::string name) : data_(data), name_(std::move(name)) {}
  template <typename T>
  T get() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
  void read(void* dst, std::size_t n) {
    if (data_.size() - pos_ < n) fail(ErrorCode::Parse, name_ + ": basis file truncated");
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void MorphableBasis::validate(double tol) const {
  const auto k = components.cols();
  if (mean.size() % 3 != 0 || components.rows() != mean.size())
    fail(ErrorCode::InvalidArgument, "basis dimensions are inconsistent");
  if (variances.size() != k) fail(ErrorCode::InvalidArgument, "basis variance count differs from component count");
  const Eigen::MatrixXd gram = components.transpose() * components;
  if (k > 0 && (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > tol)
    fail(ErrorCode::InvalidArgument, "basis components are not orthonormal");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(variances(i) > 0.0)) fail(ErrorCode::InvalidArgument, "basis variances must be positive");
    if (i > 0 && variances(i) > variances(i - 1)) fail(ErrorCode::InvalidArgument, "basis variances must descend");
  }
  for (const Face& f : faces)
    for (Index v : f)
      if (v >= vertex_count()) fail(ErrorCode::InvalidArgument, "basis face references a missing vertex");
}

Eigen::VectorXd flatten(const TriangleMesh& mesh) {
  Eigen::VectorXd x(3 * mesh.vertex_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) x.segment<3>(3 * i) = mesh.vertex(static_cast<Index>(i));
  return x;
}

MorphableBasis pca_build(std::span<const TriangleMesh> corpus, double cutoff) {
  if (corpus.size() < 2) fail(ErrorCode::InvalidArgument, "PCA needs at least two meshes");
  if (!(cutoff > 0.0 && cutoff <= 1.0)) fail(ErrorCode::InvalidArgument, "variance cutoff must lie in (0, 1]");
  const TriangleMesh& ref = corpus.front();
  for (std::size_t i = 1; i < corpus.size(); ++i) {
    if (corpus[i].vertex_count() != ref.vertex_count() || corpus[i].faces() != ref.faces())
      fail(ErrorCode::TopologyMismatch, "mesh " + std::to_string(i) + " does not share the topology of mesh 0");
  }
  const auto m = static_cast<Eigen::Index>(corpus.size());
  const auto dim = static_cast<Eigen::Index>(3 * ref.vertex_count());
  Eigen::MatrixXd data(dim, m);
  for (Eigen::Index j = 0; j < m; ++j) data.col(j) = flatten(corpus[static_cast<std::size_t>(j)]);

  MorphableBasis basis;
  basis.faces = ref.faces();
  basis.mean = data.rowwise().mean();
  data.colwise() -= basis.mean;

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double divisor = static_cast<double>(m - 1);
  const Eigen::VectorXd var = sv.array().square() / divisor;
  basis.total_variance = var.sum();
  // Averaging identical shapes leaves rounding noise, not variance.
  const double noise = 1e-13 * std::sqrt(static_cast<double>(m)) * basis.mean.norm();
  if (!(sv.size() > 0 && sv(0) > noise) || !(basis.total_variance > 0.0))
    fail(ErrorCode::Degenerate, "PCA corpus has zero total variance (all shapes identical)");

  Eigen::Index rank = 0;
  while (rank < sv.size() && rank < m - 1 && sv(rank) > 1e-10 * sv(0)) ++rank;
  Eigen::Index k = 0;
  double cumulative = 0.0;
  const double goal = cutoff * basis.total_variance * (1.0 - 1e-12);
  while (k < rank) {
    cumulative += var(k);
    ++k;
    if (cumulative >= goal) break;
  }

  basis.components = svd.matrixU().leftCols(k);
  basis.variances = var.head(k);
  // Deterministic signs: the largest-magnitude entry of each column is positive.
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    basis.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis.components(arg, c) < 0.0) basis.components.col(c) *= -1.0;
  }
  return basis;
}

TriangleMesh reconstruct(const MorphableBasis& basis, const Eigen::VectorXd& alpha) {
  const auto k = basis.components.cols();
  if (alpha.size() > k)
    fail(ErrorCode::InvalidArgument, "coefficient vector has " + std::to_string(alpha.size()) +
                                         " entries but the basis has " + std::to_string(k) + " components");
  Eigen::VectorXd shape = basis.mean;
  if (alpha.size() > 0) shape.noalias() += basis.components.leftCols(alpha.size()) * alpha;
  std::vector<Vec3> verts(basis.vertex_count());
  for (std::size_t i = 0; i < verts.size(); ++i) verts[i] = shape.segment<3>(3 * static_cast<Eigen::Index>(i));
  return TriangleMesh(std::move(verts), basis.faces);
}

Eigen::VectorXd fit_to_points(const MorphableBasis& basis, std::span<const Index> vertices,
                              std::span<const Vec3> targets, double reg_weight) {
  if (!(reg_weight >= 0.0)) fail(ErrorCode::InvalidArgument, "regularization weight must be non-negative");
  if (vertices.size() != targets.size())
    fail(ErrorCode::InvalidArgument, "fit: vertex and target counts differ");
  const auto k = basis.components.cols();
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i] >= basis.vertex_count())
      fail(ErrorCode::TopologyMismatch, "fit: vertex " + std::to_string(vertices[i]) + " is not in the basis");
    const auto row = 3 * static_cast<Eigen::Index>(vertices[i]);
    const auto phi = basis.components.middleRows<3>(row);
    normal.noalias() += phi.transpose() * phi;
    rhs.noalias() += phi.transpose() * (targets[i] - basis.mean.segment<3>(row));
  }
  normal.diagonal().array() += reg_weight;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    fail(ErrorCode::Singular, "fit: normal equations are singular; add regularization or more correspondences");
  Eigen::VectorXd alpha = ldlt.solve(rhs);
  if (!alpha.allFinite()) fail(ErrorCode::Numeric, "fit produced non-finite coefficients");
  return alpha;
}

Eigen::VectorXd fit_to_mesh(const MorphableBasis& basis, const TriangleMesh& target, double reg_weight) {
  if (target.vertex_count() != basis.vertex_count())
    fail(ErrorCode::TopologyMismatch, "fit: target has " + std::to_string(target.vertex_count()) +
                                          " vertices, basis expects " + std::to_string(basis.vertex_count()));
  if (!(reg_weight >= 0.0)) fail(ErrorCode::InvalidArgument, "regularization weight must be non-negative");
  const Eigen::VectorXd residual = flatten(target) - basis.mean;
  const Eigen::MatrixXd& phi = basis.components;
  Eigen::MatrixXd normal = phi.transpose() * phi;
  normal.diagonal().array() += reg_weight;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  Eigen::VectorXd alpha = ldlt.solve(phi.transpose() * residual);
  if (!alpha.allFinite()) fail(ErrorCode::Numeric, "fit produced non-finite coefficients");
  return alpha;
}

void save_basis(const MorphableBasis& basis, const std::filesystem::path& path) {
  basis.validate(1e-6);
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, std::uint32_t{0});
  put(out, static_cast<std::uint64_t>(basis.vertex_count()));
  put(out, static_cast<std::uint64_t>(basis.component_count()));
  put(out, static_cast<std::uint64_t>(basis.faces.size()));
  put(out, basis.total_variance);
  out.append(reinterpret_cast<const char*>(basis.mean.data()), sizeof(double) * basis.mean.size());
  out.append(reinterpret_cast<const char*>(basis.components.data()), sizeof(double) * basis.components.size());
  out.append(reinterpret_cast<const char*>(basis.variances.data()), sizeof(double) * basis.variances.size());
  for (const Face& f : basis.faces)
    for (Index v : f) put(out, static_cast<std::uint32_t>(v));
  write_text_file(path, out);
}

MorphableBasis load_basis(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  Reader in(data, path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) fail(ErrorCode::Parse, path.string() + ": not a basis file");
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) fail(ErrorCode::Parse, path.string() + ": unsupported basis version " + std::to_string(version));
  in.get<std::uint32_t>();
  const auto n = in.get<std::uint64_t>();
  const auto k = in.get<std::uint64_t>();
  const auto nf = in.get<std::uint64_t>();
  if (n > (1ull << 31) || k > (1ull << 20) || nf > (1ull << 32) || (data.size() / 8) < 3 * n * (k + 1))
    fail(ErrorCode::Parse, path.string() + ": implausible basis dimensions");
  MorphableBasis b;
  b.total_variance = in.get<double>();
  b.mean.resize(static_cast<Eigen::Index>(3 * n));
  in.read(b.mean.data(), sizeof(double) * b.mean.size());
  b.components.resize(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(k));
  in.read(b.components.data(), sizeof(double) * b.components.size());
  b.variances.resize(static_cast<Eigen::Index>(k));
  in.read(b.variances.data(), sizeof(double) * b.variances.size());
  b.faces.resize(nf);
  for (Face& f : b.faces)
    for (Index& v : f) v = in.get<std::uint32_t>();
  if (!in.at_end()) fail(ErrorCode::Parse, path.string() + ": trailing bytes after basis payload");
  b.validate(1e-6);
  return b;
}

}  // namespace regal
