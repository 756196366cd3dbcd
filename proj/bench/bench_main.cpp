// SPDX-License-Identifier: Apache-2.0
//
// Times the OpenMP kernels against their serial reference path (threads = 1
// runs the plain loop, see parallel_for).  Results are identical bit for bit
// across thread counts; this target only reports wall time and speedup.
//
// Usage: flowlab_bench [threads]   (default: the OpenMP thread budget)

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>

#include "flowlab/data.hpp"
#include "flowlab/diagonal_field.hpp"
#include "flowlab/grid.hpp"
#include "flowlab/hierarchy.hpp"
#include "flowlab/integrate.hpp"
#include "flowlab/losses.hpp"
#include "flowlab/parallel.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/schedule.hpp"
#include "flowlab/subspace_net.hpp"
#include "flowlab/velocity.hpp"

namespace {

using namespace flowlab;
using Clock = std::chrono::steady_clock;

// Best of three runs, in seconds.
template <typename Fn>
double time_best(Fn&& fn) {
  double best = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel, int threads) {
  std::cout << std::left << std::setw(28) << name << std::right << std::fixed
            << std::setprecision(4) << std::setw(10) << serial << " s" << std::setw(10)
            << parallel << " s" << std::setprecision(2) << std::setw(9)
            << (serial / parallel) << "x  (threads=" << threads << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : hardware_threads();
  std::cout << "kernel                          serial      threads=" << threads
            << "   speedup\n";

  const DataMatrix data = cube_subspace_dataset(40, 10, 100, RngSpec{77, 1});
  const SubspaceBasis basis = svd_decompose(data);

  {
    const EmbeddingConfig ec{1000.0, 1e4, 64};
    DiagonalField O{ec, Vec(), Mat::Zero(30, 64)};
    McSpec mc{200000, 1e-3, RngSpec{77, 2}, 1};
    volatile double sink = 0.0;
    const double s1 = time_best([&] { sink = loss_O_grad(O, basis, data, mc).loss.value; });
    mc.threads = threads;
    const double sp = time_best([&] { sink = loss_O_grad(O, basis, data, mc).loss.value; });
    (void)sink;
    row("loss_O_grad (2e5 samples)", s1, sp, threads);
  }

  {
    NetConfig nc;
    nc.sub_dim = basis.D;
    nc.emb = EmbeddingConfig{100.0, 1000.0, 32};
    nc.hidden = 64;
    nc.blocks = 2;
    const SubspaceNet net = make_net(nc, RngSpec{77, 3});
    McSpec mc{200000, 1e-3, RngSpec{77, 4}, 1};
    volatile double sink = 0.0;
    const double s1 = time_best([&] { sink = tst_loss_s(net, basis, data, mc).value; });
    mc.threads = threads;
    const double sp = time_best([&] { sink = tst_loss_s(net, basis, data, mc).value; });
    (void)sink;
    row("tst_loss_s (2e5 samples)", s1, sp, threads);
  }

  {
    const OptimalVelocityField field(PathSchedule::ot(), data);
    const TimeGrid grid = make_grid("geometric", 200, 1e-4);
    const Mat X0 = sample_standard_gaussian(RngSpec{77, 5}, data.dim(), 2000);
    volatile double sink = 0.0;
    const double s1 =
        time_best([&] { sink = ode_endpoints(field, X0, grid, OdeMethod::RK4, 1).sum(); });
    const double sp =
        time_best([&] { sink = ode_endpoints(field, X0, grid, OdeMethod::RK4, threads).sum(); });
    (void)sink;
    row("ode_endpoints (2000 paths)", s1, sp, threads);
  }

  {
    const DataMatrix sq = sparse_square_dataset(6, 10.0, 5.0, 2, RngSpec{77, 6});
    volatile double sink = 0.0;
    const double s1 = time_best(
        [&] { sink = estimate_nonconcentration(0.9, 0.99, sq, 2000000, RngSpec{77, 7}, 1).p_hat; });
    const double sp = time_best([&] {
      sink = estimate_nonconcentration(0.9, 0.99, sq, 2000000, RngSpec{77, 7}, threads).p_hat;
    });
    (void)sink;
    row("nonconcentration (2e6)", s1, sp, threads);
  }

  return 0;
}
