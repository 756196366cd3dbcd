// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "flowlab/grid.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/velocity.hpp"

namespace flowlab {

enum class OdeMethod { Euler, RK4 };
OdeMethod parse_method(const std::string& name);

struct Trajectory {
  Vec times;   // copy of the grid nodes
  Mat states;  // d x (steps+1), column k is the state at times(k)
};

// Deterministic integration along the grid.  A non-finite state aborts with
// the offending node index in the message.
Trajectory integrate_ode(const VelocityField& field, const Vec& x0, const TimeGrid& grid,
                         OdeMethod method);

// Endpoint-only batch drivers.  `ode_endpoints` runs one trajectory per
// column with the scalar evaluator (bit-identical for any thread count);
// `ode_endpoints_synced` steps all columns together through at_batch, which
// lets matrix-valued fields amortize their evaluation over the batch.
Mat ode_endpoints(const VelocityField& field, const Mat& X0, const TimeGrid& grid,
                  OdeMethod method, int threads = 1);
Mat ode_endpoints_synced(const VelocityField& field, const Mat& X0, const TimeGrid& grid,
                         OdeMethod method);

// Euler-Maruyama with constant diffusion sigma_noise: one Wiener increment
// per step, drawn from the trajectory's own counter stream.  sigma_noise = 0
// reproduces integrate_ode(..., Euler) bit for bit.
Trajectory integrate_sde(const VelocityField& drift, const Vec& x0, const TimeGrid& grid,
                         double sigma_noise, const RngSpec& spec);
Mat sde_endpoints(const VelocityField& drift, const Mat& X0, const TimeGrid& grid,
                  double sigma_noise, const RngSpec& spec, int threads = 1);

// Generation = integrate to 1-epsilon, then resolve the endpoint against the
// dataset: the limit of the flow is the data point nearest the terminal
// state, so `endpoint` snaps there (lowest index on exact ties, so results
// stay deterministic).  When the two smallest distances differ by less than
// snap_tol times their mean the resolution is ambiguous and `tie` is set;
// ties are reported, never silently dropped.
struct GenerateResult {
  Trajectory traj;       // integrated states up to 1-epsilon, unmodified
  Vec endpoint;          // nearest data point to the terminal state
  Index nearest = -1;    // index of that data point
  double distance = 0.0; // terminal-state distance to it (pre-snap)
  bool tie = false;
};

GenerateResult generate(const VelocityField& field, const Vec& x0, const TimeGrid& grid,
                        const DataMatrix& data, OdeMethod method, double snap_tol = 1e-6);

// "t,x0,...,x{d-1}" header, one node per row, 17 significant digits.
void save_trajectory(const Trajectory& traj, const std::string& path);

// Central finite difference of the field's space Jacobian at (x, t).
Mat field_jacobian_fd(const VelocityField& field, const Vec& x, double t, double h = 0.0);

// Central finite difference of the flow map x -> phi_{s->t}(x), computed by
// integrating a uniform RK4 sub-grid with `steps` steps per probe.
Mat flow_jacobian_fd(const VelocityField& field, const Vec& x, double s, double t, double h = 0.0,
                     Index steps = 100);

// Largest spectral norm of the FD space Jacobian over samples x grid; the
// default FD step is 1e-4 * (1 + ||x||) per probe point.
double lipschitz_estimate(const VelocityField& field, const Mat& samples, const Vec& t_grid,
                          double h = 0.0);

}  // namespace flowlab
