#pragma once

#include <sys/types.h>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "simopt/objective.hpp"

namespace simopt {

/// Reads SIMOPT_WORKER_TIMEOUT_MS (default 60000).
std::chrono::milliseconds worker_timeout_from_env();

/// {"type":"eval","id":..,"assignment":{axis:level,..},"seed":..} with keys
/// in that order and axes in space order.
std::string encode_eval_request(std::uint64_t id, const SearchSpace& space, const Solution& x, std::uint64_t seed);
nlohmann::ordered_json assignment_json(const SearchSpace& space, const Solution& x);

/// One worker subprocess speaking newline-delimited JSON on stdin/stdout.
/// Requests are strictly one at a time.
class WorkerProcess {
 public:
  WorkerProcess(const std::vector<std::string>& argv, std::chrono::milliseconds timeout);
  ~WorkerProcess();
  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  const std::string& name() const noexcept { return name_; }
  Bounds bounds() const noexcept { return bounds_; }

  /// Sends one eval request and waits for its reply. Throws WorkerError on
  /// an error reply, id mismatch, malformed line, timeout or worker exit.
  double evaluate(std::uint64_t id, const SearchSpace& space, const Solution& x, std::uint64_t seed);

  /// Sends shutdown and reaps the process; returns its exit status.
  int shutdown();

 private:
  void write_line(const std::string& line);
  std::string read_line();
  void kill_now();

  pid_t pid_ = -1;
  int to_worker_ = -1;
  int from_worker_ = -1;
  std::string buffer_;
  std::chrono::milliseconds timeout_;
  std::string name_;
  Bounds bounds_;
  bool broken_ = false;
};

/// Objective backed by a pool of identical worker processes.
class ExternalObjective final : public Objective {
 public:
  ExternalObjective(std::vector<std::string> argv, std::size_t pool_size,
                    std::chrono::milliseconds timeout = worker_timeout_from_env());

  Bounds bounds() const override { return bounds_; }
  std::string name() const override { return name_; }
  double sample(const SearchSpace& space, const Solution& x, std::uint64_t seed) const override;

 private:
  std::vector<std::unique_ptr<WorkerProcess>> workers_;
  mutable std::vector<bool> busy_;
  mutable std::mutex mutex_;
  mutable std::condition_variable freed_;
  mutable std::uint64_t next_id_ = 1;
  Bounds bounds_;
  std::string name_;
};

}  // namespace simopt
