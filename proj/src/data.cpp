// SPDX-License-Identifier: Apache-2.0
#include "flowlab/data.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "flowlab/io.hpp"
#include "flowlab/json_util.hpp"

namespace flowlab {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open file for writing: " + path);
  out << text;
  require(out.good(), "write failed: " + path);
}

namespace {

double parse_double(const std::string& token, Index row, Index col) {
  const char* b = token.data();
  const char* e = b + token.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  double v = 0.0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw config_error("dataset parse failure at row " + std::to_string(row + 1) +
                       ", column " + std::to_string(col + 1) + ": '" + token + "'");
  if (!std::isfinite(v))
    throw config_error("dataset has non-finite value at row " + std::to_string(row + 1) +
                       ", column " + std::to_string(col + 1));
  return v;
}

DataMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  require(!rows.empty(), "dataset is empty");
  const Index d = static_cast<Index>(rows[0].size());
  require(d > 0, "dataset row 1 has no values");
  Mat points(d, static_cast<Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    require(static_cast<Index>(rows[r].size()) == d,
            "dataset row " + std::to_string(r + 1) + " has " +
                std::to_string(rows[r].size()) + " values, expected " + std::to_string(d));
    for (Index i = 0; i < d; ++i) points(i, static_cast<Index>(r)) = rows[r][i];
  }
  return DataMatrix{std::move(points)};
}

}  // namespace

DataMatrix load_dataset(const std::string& path, const std::string& format) {
  if (format == "csv") {
    const std::string text = read_file(path);
    std::vector<std::vector<double>> rows;
    std::istringstream lines(text);
    std::string line;
    Index r = 0;
    while (std::getline(lines, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<double> row;
      std::istringstream cells(line);
      std::string cell;
      Index c = 0;
      while (std::getline(cells, cell, ',')) row.push_back(parse_double(cell, r, c++));
      rows.push_back(std::move(row));
      ++r;
    }
    return from_rows(rows);
  }
  if (format == "json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw config_error("dataset JSON parse failure in " + path + ": " + e.what());
    }
    require(j.is_array() && !j.empty(), "dataset JSON must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (size_t r = 0; r < j.size(); ++r) {
      require(j[r].is_array(), "dataset JSON row " + std::to_string(r + 1) + " is not an array");
      std::vector<double> row;
      for (size_t c = 0; c < j[r].size(); ++c) {
        require(j[r][c].is_number(), "dataset JSON row " + std::to_string(r + 1) +
                                         ", column " + std::to_string(c + 1) + " is not a number");
        const double v = j[r][c].get<double>();
        require(std::isfinite(v), "dataset JSON has non-finite value at row " +
                                      std::to_string(r + 1) + ", column " + std::to_string(c + 1));
        row.push_back(v);
      }
      rows.push_back(std::move(row));
    }
    return from_rows(rows);
  }
  throw config_error("unknown dataset format: " + format);
}

void save_dataset(const DataMatrix& data, const std::string& path, const std::string& format) {
  require(data.points.size() > 0, "cannot save empty dataset");
  if (format == "csv") {
    std::ostringstream out;
    for (Index j = 0; j < data.count(); ++j) {
      for (Index i = 0; i < data.dim(); ++i) {
        if (i) out << ',';
        out << fmt17(data.points(i, j));
      }
      out << '\n';
    }
    write_file(path, out.str());
    return;
  }
  if (format == "json") {
    std::ostringstream out;
    out << "[\n";
    for (Index j = 0; j < data.count(); ++j) {
      out << "  [";
      for (Index i = 0; i < data.dim(); ++i) {
        if (i) out << ", ";
        out << fmt17(data.points(i, j));
      }
      out << (j + 1 < data.count() ? "],\n" : "]\n");
    }
    out << "]\n";
    write_file(path, out.str());
    return;
  }
  throw config_error("unknown dataset format: " + format);
}

SubspaceBasis svd_decompose(const DataMatrix& data, double rank_tol) {
  require(data.points.size() > 0, "svd_decompose: empty dataset");
  require(rank_tol > 0.0 && rank_tol < 1.0, "svd_decompose: rank_tol must be in (0,1)");
  const Mat& Y = data.points;
  Eigen::BDCSVD<Mat> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  require(sv.size() > 0 && sv(0) > 0.0, "svd_decompose: dataset is identically zero");
  Index D = 0;
  while (D < sv.size() && sv(D) > rank_tol * sv(0)) ++D;

  SubspaceBasis basis;
  basis.rank_tol = rank_tol;
  basis.D = D;
  basis.V = svd.matrixU().leftCols(D);
  basis.R = sv.head(D).asDiagonal() * svd.matrixV().leftCols(D).transpose();
  // Complete V to an orthonormal basis of R^d: the trailing columns of the Q
  // factor of V span the orthogonal complement.
  const Index d = Y.rows();
  Eigen::HouseholderQR<Mat> qr(basis.V);
  Mat Q = qr.householderQ() * Mat::Identity(d, d);
  basis.Vperp = Q.rightCols(d - D);
  return basis;
}

DataMatrix sparse_square_dataset(Index count, double box, double min_separation, Index dim,
                                 const RngSpec& rng) {
  require(count >= 1, "sparse dataset needs at least one point");
  require(dim >= 1, "sparse dataset needs a positive dimension");
  require(box > 0.0, "sparse dataset box half-width must be positive");
  require(min_separation >= 0.0, "sparse dataset separation must be nonnegative");
  constexpr std::uint64_t kAttempts = 1000;
  for (std::uint64_t attempt = 0; attempt < kAttempts; ++attempt) {
    CounterRng gen(substream(rng, attempt));
    Mat pts(dim, count);
    for (Index j = 0; j < count; ++j)
      for (Index i = 0; i < dim; ++i) pts(i, j) = gen.uniform(-box, box);
    double min_d = std::numeric_limits<double>::infinity();
    for (Index a = 0; a < count; ++a)
      for (Index b = a + 1; b < count; ++b)
        min_d = std::min(min_d, (pts.col(a) - pts.col(b)).norm());
    if (count < 2 || min_d >= min_separation) return DataMatrix{std::move(pts)};
  }
  throw invariant_error("sparse dataset: separation " + fmt17(min_separation) +
                        " not reachable in " + std::to_string(kAttempts) + " attempts");
}

DataMatrix cluster_dataset(const Mat& centers, Index per_cluster, double std_dev,
                           const RngSpec& rng) {
  require(centers.size() > 0, "cluster dataset needs at least one center");
  require(per_cluster >= 1, "cluster dataset needs points per cluster");
  require(std_dev >= 0.0, "cluster scale must be nonnegative");
  CounterRng gen(rng);
  Mat pts(centers.rows(), centers.cols() * per_cluster);
  Index col = 0;
  for (Index c = 0; c < centers.cols(); ++c)
    for (Index k = 0; k < per_cluster; ++k, ++col)
      for (Index i = 0; i < centers.rows(); ++i)
        pts(i, col) = centers(i, c) + std_dev * gen.normal();
  return DataMatrix{std::move(pts)};
}

DataMatrix cube_subspace_dataset(Index d, Index sub_dim, Index count, const RngSpec& rng) {
  require(d >= 1 && sub_dim >= 1 && sub_dim <= d, "cube dataset: need 1 <= sub_dim <= d");
  require(count >= 1, "cube dataset needs at least one point");
  CounterRng gen(rng);
  Mat pts = Mat::Zero(d, count);
  for (Index j = 0; j < count; ++j)
    for (Index i = 0; i < sub_dim; ++i) pts(i, j) = gen.uniform();
  return DataMatrix{std::move(pts)};
}

nlohmann::json matrix_rows(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_rows(const nlohmann::json& rows, const std::string& name) {
  require(rows.is_array() && !rows.empty(), "basis JSON field '" + name + "' must be an array");
  const Index r = static_cast<Index>(rows.size());
  require(rows[0].is_array() && !rows[0].empty(),
          "basis JSON field '" + name + "' rows must be arrays");
  const Index c = static_cast<Index>(rows[0].size());
  Mat m(r, c);
  for (Index i = 0; i < r; ++i) {
    require(static_cast<Index>(rows[i].size()) == c,
            "basis JSON field '" + name + "' is ragged at row " + std::to_string(i + 1));
    for (Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(what + ": invalid JSON: " + e.what());
  }
}

std::string basis_to_json(const SubspaceBasis& basis) {
  nlohmann::json j;
  j["V"] = matrix_rows(basis.V);
  j["R"] = matrix_rows(basis.R);
  j["D"] = basis.D;
  return j.dump(2) + "\n";
}

SubspaceBasis basis_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("basis JSON parse failure: ") + e.what());
  }
  require(j.contains("V") && j.contains("R") && j.contains("D"),
          "basis JSON must contain fields V, R, D");
  SubspaceBasis basis;
  basis.V = matrix_from_rows(j["V"], "V");
  basis.R = matrix_from_rows(j["R"], "R");
  basis.D = j["D"].get<Index>();
  require(basis.V.cols() == basis.D && basis.R.rows() == basis.D,
          "basis JSON: D does not match the stored matrix shapes");
  const Index d = basis.V.rows();
  Eigen::HouseholderQR<Mat> qr(basis.V);
  Mat Q = qr.householderQ() * Mat::Identity(d, d);
  basis.Vperp = Q.rightCols(d - basis.D);
  return basis;
}

void save_basis(const SubspaceBasis& basis, const std::string& path) {
  write_file(path, basis_to_json(basis));
}

SubspaceBasis load_basis(const std::string& path) { return basis_from_json(read_file(path)); }

}  // namespace flowlab
