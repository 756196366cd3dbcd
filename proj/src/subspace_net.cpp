// SPDX-License-Identifier: Apache-2.0
#include "flowlab/subspace_net.hpp"

#include <cmath>

#include "flowlab/json_util.hpp"

namespace flowlab {

double softplus(double z) {
  // log(1 + e^z) = max(z, 0) + log1p(e^{-|z|}); exact for large |z|.
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double softplus_prime(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

namespace {

void validate_net(const NetConfig& cfg) {
  require(cfg.sub_dim >= 1, "net: sub_dim must be >= 1");
  validate(cfg.emb);
  require(cfg.hidden >= 1, "net: hidden width must be >= 1");
  require(cfg.blocks >= 0, "net: block count must be >= 0");
}

Mat init_matrix(Index rows, Index cols, CounterRng& rng) {
  // Uniform on [-a, a] with a = sqrt(6 / fan_in) has variance 2 / fan_in.
  const double a = std::sqrt(6.0 / static_cast<double>(cols));
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-a, a);
  return m;
}

void softplus_batch(const Mat& z, Mat& out) {
  out.resize(z.rows(), z.cols());
  const double* zp = z.data();
  double* op = out.data();
  for (Index i = 0; i < z.size(); ++i) op[i] = softplus(zp[i]);
}

}  // namespace

SubspaceNet make_net(const NetConfig& cfg, const RngSpec& rng) {
  validate_net(cfg);
  SubspaceNet net;
  net.cfg = cfg;
  CounterRng gen(rng);
  net.W_in = init_matrix(cfg.hidden, cfg.in_dim(), gen);
  net.b_in = Vec::Zero(cfg.hidden);
  for (Index k = 0; k < cfg.blocks; ++k) {
    net.W1.push_back(init_matrix(cfg.hidden, cfg.hidden, gen));
    net.b1.push_back(Vec::Zero(cfg.hidden));
    net.W2.push_back(init_matrix(cfg.hidden, cfg.hidden, gen));
    net.b2.push_back(Vec::Zero(cfg.hidden));
  }
  net.W_out = init_matrix(cfg.sub_dim, cfg.hidden, gen);
  net.b_out = Vec::Zero(cfg.sub_dim);
  return net;
}

Index param_count(const SubspaceNet& net) {
  Index n = net.W_in.size() + net.b_in.size() + net.W_out.size() + net.b_out.size();
  for (size_t k = 0; k < net.W1.size(); ++k)
    n += net.W1[k].size() + net.b1[k].size() + net.W2[k].size() + net.b2[k].size();
  return n;
}

namespace {

void pack(double*& p, const Mat& m) {
  std::copy(m.data(), m.data() + m.size(), p);
  p += m.size();
}

void unpack(const double*& p, Mat& m) {
  std::copy(p, p + m.size(), m.data());
  p += m.size();
}

void pack(double*& p, const Vec& v) {
  std::copy(v.data(), v.data() + v.size(), p);
  p += v.size();
}

void unpack(const double*& p, Vec& v) {
  std::copy(p, p + v.size(), v.data());
  p += v.size();
}

}  // namespace

Vec flatten(const SubspaceNet& net) {
  Vec theta(param_count(net));
  double* p = theta.data();
  pack(p, net.W_in);
  pack(p, net.b_in);
  for (size_t k = 0; k < net.W1.size(); ++k) {
    pack(p, net.W1[k]);
    pack(p, net.b1[k]);
    pack(p, net.W2[k]);
    pack(p, net.b2[k]);
  }
  pack(p, net.W_out);
  pack(p, net.b_out);
  return theta;
}

void unflatten(const Vec& theta, SubspaceNet& net) {
  require(theta.size() == param_count(net), "unflatten: parameter count mismatch");
  const double* p = theta.data();
  unpack(p, net.W_in);
  unpack(p, net.b_in);
  for (size_t k = 0; k < net.W1.size(); ++k) {
    unpack(p, net.W1[k]);
    unpack(p, net.b1[k]);
    unpack(p, net.W2[k]);
    unpack(p, net.b2[k]);
  }
  unpack(p, net.W_out);
  unpack(p, net.b_out);
}

Mat net_forward_cached(const SubspaceNet& net, const Mat& U, NetCache& cache) {
  require(U.rows() == net.cfg.in_dim(), "net forward: input row count must be D + emb dim");
  const Index blocks = net.cfg.blocks;
  cache.U = U;
  cache.h.assign(static_cast<size_t>(blocks) + 1, Mat());
  cache.z.assign(static_cast<size_t>(blocks), Mat());
  cache.a.assign(static_cast<size_t>(blocks), Mat());

  cache.h[0] = (net.W_in * U).colwise() + net.b_in;
  for (Index k = 0; k < blocks; ++k) {
    const Mat& hk = cache.h[static_cast<size_t>(k)];
    cache.z[static_cast<size_t>(k)] = (net.W1[static_cast<size_t>(k)] * hk).colwise() +
                                      net.b1[static_cast<size_t>(k)];
    softplus_batch(cache.z[static_cast<size_t>(k)], cache.a[static_cast<size_t>(k)]);
    cache.h[static_cast<size_t>(k) + 1] =
        hk + ((net.W2[static_cast<size_t>(k)] * cache.a[static_cast<size_t>(k)]).colwise() +
              net.b2[static_cast<size_t>(k)]);
  }
  return (net.W_out * cache.h[static_cast<size_t>(blocks)]).colwise() + net.b_out;
}

Mat net_forward(const SubspaceNet& net, const Mat& U) {
  NetCache cache;
  return net_forward_cached(net, U, cache);
}

Vec net_apply(const SubspaceNet& net, const Vec& x_sub, double t) {
  require(x_sub.size() == net.cfg.sub_dim, "net apply: subspace coordinate size mismatch");
  Vec u(net.cfg.in_dim());
  u.head(net.cfg.sub_dim) = x_sub;
  emb_into(t, net.cfg.emb, u.data() + net.cfg.sub_dim);
  return net_forward(net, u);
}

Vec net_backward(const SubspaceNet& net, const NetCache& cache, const Mat& upstream,
                 Mat* input_grads) {
  const Index blocks = net.cfg.blocks;
  require(upstream.rows() == net.cfg.sub_dim && upstream.cols() == cache.U.cols(),
          "net backward: upstream shape mismatch");

  SubspaceNet grad = net;  // same shapes; contents overwritten below

  grad.W_out.noalias() = upstream * cache.h[static_cast<size_t>(blocks)].transpose();
  grad.b_out = upstream.rowwise().sum();
  Mat gh = net.W_out.transpose() * upstream;

  for (Index k = blocks - 1; k >= 0; --k) {
    const size_t ks = static_cast<size_t>(k);
    grad.W2[ks].noalias() = gh * cache.a[ks].transpose();
    grad.b2[ks] = gh.rowwise().sum();
    Mat gz = net.W2[ks].transpose() * gh;
    const Mat& z = cache.z[ks];
    double* gp = gz.data();
    const double* zp = z.data();
    for (Index i = 0; i < gz.size(); ++i) gp[i] *= softplus_prime(zp[i]);
    grad.W1[ks].noalias() = gz * cache.h[ks].transpose();
    grad.b1[ks] = gz.rowwise().sum();
    gh.noalias() += net.W1[ks].transpose() * gz;  // skip path adds identity
  }

  grad.W_in.noalias() = gh * cache.U.transpose();
  grad.b_in = gh.rowwise().sum();
  if (input_grads != nullptr) input_grads->noalias() = net.W_in.transpose() * gh;
  return flatten(grad);
}

std::string net_to_json(const SubspaceNet& net) {
  nlohmann::json j;
  j["sub_dim"] = net.cfg.sub_dim;
  j["hidden"] = net.cfg.hidden;
  j["blocks"] = net.cfg.blocks;
  j["emb"] = {{"s", net.cfg.emb.s}, {"ell", net.cfg.emb.ell}, {"dim", net.cfg.emb.dim}};
  const Vec theta = flatten(net);
  nlohmann::json w = nlohmann::json::array();
  for (Index i = 0; i < theta.size(); ++i) w.push_back(theta(i));
  j["weights"] = std::move(w);
  return j.dump();
}

SubspaceNet net_from_json(const std::string& text) {
  nlohmann::json j = parse_json(text, "net checkpoint");
  for (const char* field : {"sub_dim", "hidden", "blocks", "emb", "weights"})
    require(j.contains(field), std::string("net checkpoint: missing field '") + field + "'");
  NetConfig cfg;
  cfg.sub_dim = j["sub_dim"].get<Index>();
  cfg.hidden = j["hidden"].get<Index>();
  cfg.blocks = j["blocks"].get<Index>();
  cfg.emb.s = j["emb"]["s"].get<double>();
  cfg.emb.ell = j["emb"]["ell"].get<double>();
  cfg.emb.dim = j["emb"]["dim"].get<Index>();
  SubspaceNet net = make_net(cfg, RngSpec{});
  const auto& w = j["weights"];
  require(static_cast<Index>(w.size()) == param_count(net),
          "net checkpoint: weight count does not match the declared shapes");
  Vec theta(param_count(net));
  for (Index i = 0; i < theta.size(); ++i) theta(i) = w[static_cast<size_t>(i)].get<double>();
  unflatten(theta, net);
  return net;
}

}  // namespace flowlab
