#pragma once
// Brownian path generation, log-Euler integration and nested Monte Carlo.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fwdrel/market_population.hpp"
#include "fwdrel/rng.hpp"

namespace fwdrel {

// Runs f(i) for i in [0, n). Work is split in contiguous blocks; each index is
// handled by exactly one worker, so results written by index do not depend on
// the number of threads.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  threads = unsigned(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      const std::size_t lo = n * w / threads, hi = n * (w + 1) / threads;
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Cumulative Brownian values on the grid nodes; values[0] == 0.
struct BrownianPath {
  std::vector<double> values;
  double increment(std::size_t k) const { return values[k + 1] - values[k]; }
};

struct PathBundle {
  TimeGrid grid;
  BrownianPath common;
  std::vector<BrownianPath> idio;
  std::uint64_t seed = 0;
  std::uint64_t outer = 0;

  double dB(std::size_t k) const { return common.increment(k); }
  double dW(std::size_t j, std::size_t k) const { return idio.at(j).increment(k); }

  // Same Brownian paths observed on a grid `factor` times coarser.
  PathBundle coarsen(std::size_t factor) const {
    if (factor == 0 || grid.steps % factor != 0) throw std::invalid_argument("coarsen: factor must divide steps");
    PathBundle out{{grid.T, grid.steps / factor}, {}, {}, seed, outer};
    auto sub = [&](const BrownianPath& p) {
      BrownianPath q;
      for (std::size_t k = 0; k <= grid.steps; k += factor) q.values.push_back(p.values[k]);
      return q;
    };
    out.common = sub(common);
    for (const auto& p : idio) out.idio.push_back(sub(p));
    return out;
  }
};

// Brownian increment for (seed, outer, index, step). Index 0 is the common
// noise, index j + 1 the j-th idiosyncratic noise.
inline double brownian_increment(const CounterRng& rng, std::uint64_t outer, std::uint64_t index, std::uint64_t step,
                                 double dt) {
  return std::sqrt(dt) * rng.normal(stream_id(outer, index), step);
}

inline BrownianPath brownian_path(const CounterRng& rng, const TimeGrid& g, std::uint64_t outer, std::uint64_t index) {
  BrownianPath p;
  p.values.resize(g.nodes());
  p.values[0] = 0.0;
  const double dt = g.dt();
  for (std::size_t k = 0; k < g.steps; ++k) p.values[k + 1] = p.values[k] + brownian_increment(rng, outer, index, k, dt);
  return p;
}

inline PathBundle generate_bundle(const TimeGrid& g, std::size_t nIdio, std::uint64_t seed, std::uint64_t outer = 0) {
  if (!(g.T >= 0.0) || (g.steps == 0 && g.T > 0.0)) throw std::invalid_argument("generate_bundle: bad time grid");
  const CounterRng rng(seed);
  PathBundle b{g, {}, {}, seed, outer};
  b.common = brownian_path(rng, g, outer, 0);
  b.idio.reserve(nIdio);
  for (std::size_t j = 0; j < nIdio; ++j) b.idio.push_back(brownian_path(rng, g, outer, j + 1));
  return b;
}

struct ProcessPath {
  std::vector<double> t;
  std::vector<double> x;
};

// Log-Euler scheme for dX = X (b(t,X) dt + vW(t) dW + vB(t) dB):
//   log X_{k+1} = log X_k + (b - (vW^2 + vB^2)/2) dt + vW dW_k + vB dB_k.
// The state stays positive by construction.
template <class Drift, class VolW, class VolB>
ProcessPath integrate_log_euler(double x0, Drift&& b, VolW&& vW, VolB&& vB, const PathBundle& bundle,
                                std::size_t idio) {
  if (!(x0 > 0.0)) throw std::invalid_argument("integrate_log_euler: initial value must be positive");
  const TimeGrid& g = bundle.grid;
  const double dt = g.dt();
  ProcessPath p;
  p.t.resize(g.nodes());
  p.x.resize(g.nodes());
  p.t[0] = 0.0;
  p.x[0] = x0;
  double lx = std::log(x0);
  for (std::size_t k = 0; k < g.steps; ++k) {
    const double t = g.t(k);
    const double w = vW(t), s = vB(t);
    const double dW = bundle.idio.empty() ? 0.0 : bundle.dW(idio, k);
    lx += (b(t, p.x[k]) - 0.5 * (w * w + s * s)) * dt + w * dW + s * bundle.dB(k);
    p.t[k + 1] = g.t(k + 1);
    p.x[k + 1] = std::exp(lx);
  }
  return p;
}

// Cumulative trapezoid integral of samples on the grid.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double dt) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * dt * (f[k - 1] + f[k]);
  return out;
}

struct ConditionalMean {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

// Average of an inner functional over the idiosyncratic samples of one outer
// path. f(j) returns the grid values of sample j.
template <class F>
ConditionalMean nested_conditional_mean(std::size_t nInner, std::size_t nodes, F&& f) {
  if (nInner == 0) throw std::invalid_argument("nested_conditional_mean: no inner samples");
  std::vector<double> s(nodes, 0.0), s2(nodes, 0.0);
  for (std::size_t j = 0; j < nInner; ++j) {
    const std::vector<double> v = f(j);
    for (std::size_t k = 0; k < nodes; ++k) {
      s[k] += v[k];
      s2[k] += v[k] * v[k];
    }
  }
  ConditionalMean out{std::vector<double>(nodes), std::vector<double>(nodes, 0.0)};
  for (std::size_t k = 0; k < nodes; ++k) {
    out.mean[k] = s[k] / double(nInner);
    if (nInner > 1) {
      const double var = std::max(0.0, (s2[k] - double(nInner) * out.mean[k] * out.mean[k]) / double(nInner - 1));
      out.stderr_[k] = std::sqrt(var / double(nInner));
    }
  }
  return out;
}

// Shortest representation that round-trips a double, for stable text output.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  if (v == 0.0) return "0";
  char buf[40];
  if (std::abs(v) < 1e15 && v == std::floor(v)) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void write_path_csv(std::ostream& os, const ProcessPath& p) {
  os << "t,value\n";
  for (std::size_t k = 0; k < p.t.size(); ++k) os << format_double(p.t[k]) << ',' << format_double(p.x[k]) << '\n';
}

// Binary record: magic "FWDP", uint64 node count, then t and x as
// little-endian IEEE doubles.
inline void write_path_binary(std::ostream& os, const ProcessPath& p) {
  const char magic[4] = {'F', 'W', 'D', 'P'};
  os.write(magic, 4);
  auto put64 = [&](std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
  };
  put64(p.t.size());
  for (const auto* arr : {&p.t, &p.x})
    for (double v : *arr) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put64(bits);
    }
}

inline ProcessPath read_path_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FWDP", 4) != 0) throw std::runtime_error("read_path_binary: bad magic");
  auto get64 = [&]() {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("read_path_binary: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
  };
  const std::uint64_t n = get64();
  ProcessPath p;
  for (auto* arr : {&p.t, &p.x}) {
    arr->resize(n);
    for (auto& v : *arr) {
      const std::uint64_t bits = get64();
      std::memcpy(&v, &bits, 8);
    }
  }
  return p;
}

}  // namespace fwdrel
