#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rgap/eigensolver.hpp"
#include "rgap/generators.hpp"
#include "rgap/mms.hpp"

namespace rgap {

enum class ExitCode : int { ok = 0, audit_violation = 2, solver_failure = 3, config_error = 4 };

/// Thrown for malformed or out-of-range configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpaceConfig {
  std::string builder = "suspension";  ///< model_interval | truncated_model | suspension
  double K = 1;
  double N = 2;
  double L = 0;                        ///< truncation length; 0 means L_fraction * D
  double L_fraction = 1;
  double fiber = 2 * 3.14159265358979323846;
  Index n_t = 128;
  Index n_theta = 64;
  Index n_cells = 256;
};

DiscreteMMS build_space(const SpaceConfig& cfg);

struct RunOptions {
  std::string command;
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  ///< dotted.key=value, value in TOML syntax (bare words are strings)
};

const std::vector<std::string>& command_names();

/// Runs one command, writing <out>/<command>.csv and <out>/<command>.json. Progress goes to log.
ExitCode run_command(const RunOptions& opts, std::ostream& log);

/// Applies fn(i) for i in [0, n) on up to `threads` workers and returns results in index order.
/// The first exception by index is rethrown after all workers finish.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t n, Fn&& fn, unsigned threads = std::thread::hardware_concurrency()) {
  std::vector<Result> out(n);
  std::vector<std::exception_ptr> errors(n);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  auto worker = [&](unsigned w) {
    for (std::size_t i = w; i < n; i += threads) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Building blocks shared by the commands and the acceptance checks.

struct GapRow {
  std::string domain;
  double v = 0;
  double lambda_domain = 0;
  double lambda_model = 0;
  double deficit = 0;
};

/// lambda^p_X(omega) against lambda^p_{K,N,v} at v = m(omega), the model solved with n_model cells.
GapRow gap_row(const DiscreteMMS& X, const Subset& omega, const std::string& name, double p, Index n_model = 4096);

/// ||u - w o t||_p over the cap, where u is the domain eigenfunction and w the model eigenfunction
/// (n_model cells, linearly interpolated at the ring radii), both of unit L^p norm.
double radial_profile_distance(const DiscreteMMS& X, const EigenResult& domain, double p, Index n_model = 4096);

struct SweepRow {
  double L = 0;
  double v = 0;              ///< measure of the initial segment actually used
  double lambda_domain = 0;
  double lambda_model = 0;   ///< model problem on the cell count of the segment
  double delta = 0;
};

/// Dirichlet eigenvalue of the initial segment of mass ~ v on the truncated model [0, L] against the
/// model value at the same mass and cell count.
SweepRow almost_rigidity_row(double N, double p, double v, double L, Index n_cells);

}  // namespace rgap
