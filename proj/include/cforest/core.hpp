#pragma once

// Shared vocabulary for the cforest library: error type, κ sentinel,
// seeded random substreams and a deterministic parallel loop.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace cforest {

inline constexpr const char* kVersion = "1.0.0";

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class ErrorKind {
  malformed_input,
  empty_input,
  invalid_spec,
  invalid_input,
  infeasible_k,
  isolated_vertex,
  degenerate_profile,
  length_mismatch,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::malformed_input: return "malformed input";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::invalid_spec: return "invalid spec";
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::infeasible_k: return "infeasible k";
    case ErrorKind::isolated_vertex: return "isolated vertex";
    case ErrorKind::degenerate_profile: return "degenerate profile";
    case ErrorKind::length_mismatch: return "length mismatch";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// κ value reported when the between-cluster sum vanishes or a view cannot
/// be clustered. Compares greater than every finite κ.
inline constexpr double kInfiniteKappa = std::numeric_limits<double>::infinity();

// --- seeding -------------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of an independent stream identified by (seed, tags...). Used to give
/// every repetition, ensemble member and trial its own generator, so results
/// do not depend on scheduling.
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
  std::uint64_t h = splitmix64(seed);
  ((h = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(tags) + 0x632be59bd9b4e019ULL))), ...);
  return h;
}

template <typename... Tags>
Rng substream(std::uint64_t seed, Tags... tags) {
  return Rng(derive_seed(seed, tags...));
}

/// Uniform sample of `count` distinct values from [0, population), in draw order.
inline std::vector<int> sample_without_replacement(int population, int count, Rng& rng) {
  std::vector<int> pool(static_cast<std::size_t>(population));
  for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
  count = std::min(count, population);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, population - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

// --- threading -----------------------------------------------------------

/// Thread count from CF_THREADS, else 1.
inline int default_thread_count() {
  if (const char* env = std::getenv("CF_THREADS")) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), value);
    if (ec == std::errc() && value > 0) return value;
  }
  return 1;
}

/// Runs body(i) for i in [0, count). Each index writes only its own output
/// slot, so the result is the same for every thread count. The first
/// exception thrown by any body is rethrown on the calling thread.
template <typename Body>
void parallel_for(int count, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads - 1));
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Shortest round-trip text for a double; locale independent.
inline std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace cforest
