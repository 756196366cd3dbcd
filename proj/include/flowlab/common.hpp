// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace flowlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Thrown when inputs violate a documented precondition (bad shapes, bad
// configuration values, unparsable files).  The CLI maps this to exit code 2.
class config_error : public std::invalid_argument {
 public:
  explicit config_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Thrown when a numerical invariant fails at run time (non-finite state,
// failed certification, ...).  The CLI maps this to exit code 1.
class invariant_error : public std::runtime_error {
 public:
  explicit invariant_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw invariant_error(msg);
}

// 17 significant digits: the shortest fixed precision that round-trips any
// IEEE-754 double exactly, used by every CSV/JSON writer in the library.
std::string fmt17(double v);

}  // namespace flowlab
