// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "flowlab/common.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

// A dataset of N points in R^d, stored one point per column.
struct DataMatrix {
  Mat points;  // d x N

  Index dim() const { return points.rows(); }
  Index count() const { return points.cols(); }
};

// Reduced decomposition Y = V R of a dataset: V (d x D) holds an orthonormal
// basis of the span of the points, R (D x N) the coordinates in that basis,
// and Vperp (d x (d-D)) an orthonormal basis of the complement.
struct SubspaceBasis {
  Mat V;
  Mat R;
  Mat Vperp;
  Index D = 0;
  double rank_tol = 1e-10;
};

// Experiment datasets.  sparse_square_dataset draws `count` points uniform
// on [-box, box]^dim and redraws the whole set until every pairwise distance
// is at least min_separation (an attempt cap catches infeasible requests).
// cluster_dataset adds per_cluster Gaussian points of scale std_dev around
// each column of centers.  cube_subspace_dataset fills the first sub_dim
// coordinates with U[0, 1] draws and zeros the rest, so the points span an
// axis-aligned subspace of R^d.
DataMatrix sparse_square_dataset(Index count, double box, double min_separation, Index dim,
                                 const RngSpec& rng);
DataMatrix cluster_dataset(const Mat& centers, Index per_cluster, double std_dev,
                           const RngSpec& rng);
DataMatrix cube_subspace_dataset(Index d, Index sub_dim, Index count, const RngSpec& rng);

// format: "csv" (one point per row, no header) or "json" (array of rows).
DataMatrix load_dataset(const std::string& path, const std::string& format);
void save_dataset(const DataMatrix& data, const std::string& path,
                  const std::string& format);

// Rank-revealing SVD split; D counts singular values above rank_tol times the
// largest one.  An all-zero dataset has no usable span and is rejected.
SubspaceBasis svd_decompose(const DataMatrix& data, double rank_tol = 1e-10);

std::string basis_to_json(const SubspaceBasis& basis);
SubspaceBasis basis_from_json(const std::string& text);
void save_basis(const SubspaceBasis& basis, const std::string& path);
SubspaceBasis load_basis(const std::string& path);

}  // namespace flowlab
