#include "simopt/worker_client.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "simopt/errors.hpp"

namespace simopt {

std::chrono::milliseconds worker_timeout_from_env() {
  if (const char* raw = std::getenv("SIMOPT_WORKER_TIMEOUT_MS")) {
    char* end = nullptr;
    const long long v = std::strtoll(raw, &end, 10);
    if (end != raw && *end == '\0' && v > 0) return std::chrono::milliseconds(v);
  }
  return std::chrono::milliseconds(60000);
}

nlohmann::ordered_json assignment_json(const SearchSpace& space, const Solution& x) {
  space.validate(x);
  nlohmann::ordered_json a = nlohmann::ordered_json::object();
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    const auto& axis = space.axes()[d];
    std::visit([&](const auto& v) { a[axis.name] = v; }, axis.levels[x.indices[d]]);
  }
  return a;
}

std::string encode_eval_request(std::uint64_t id, const SearchSpace& space, const Solution& x, std::uint64_t seed) {
  nlohmann::ordered_json req;
  req["type"] = "eval";
  req["id"] = id;
  req["assignment"] = assignment_json(space, x);
  req["seed"] = seed;
  return req.dump();
}

WorkerProcess::WorkerProcess(const std::vector<std::string>& argv, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (argv.empty()) throw ConfigError("worker command is empty");
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw WorkerError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw WorkerError(std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) throw WorkerError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_worker_ = in_pipe[1];
  from_worker_ = out_pipe[0];

  try {
    const auto line = read_line();
    const auto hello = nlohmann::json::parse(line);
    if (hello.value("type", "") != "ready") throw WorkerError("worker handshake was not a ready message: " + line);
    name_ = hello.value("name", "worker");
    const auto& b = hello.at("bounds");
    bounds_ = {b.at(0).get<double>(), b.at(1).get<double>()};
    if (!(bounds_.lower < bounds_.upper)) throw WorkerError("worker declared bounds with a >= b");
  } catch (const nlohmann::json::exception& e) {
    kill_now();
    throw WorkerError(std::string("malformed worker handshake: ") + e.what());
  } catch (...) {
    kill_now();
    throw;
  }
}

WorkerProcess::~WorkerProcess() {
  try {
    shutdown();
  } catch (...) {
    kill_now();
  }
}

void WorkerProcess::write_line(const std::string& line) {
  std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(to_worker_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw WorkerError(std::string("write to worker failed: ") + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::string WorkerProcess::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      broken_ = true;
      throw WorkerError("worker timed out after " + std::to_string(timeout_.count()) + " ms");
    }
    pollfd pfd{from_worker_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw WorkerError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(from_worker_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw WorkerError(std::string("read from worker failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      broken_ = true;
      throw WorkerError("worker exited unexpectedly");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

double WorkerProcess::evaluate(std::uint64_t id, const SearchSpace& space, const Solution& x, std::uint64_t seed) {
  if (broken_) throw WorkerError("worker connection is no longer usable");
  write_line(encode_eval_request(id, space, x, seed));
  const auto line = read_line();
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    broken_ = true;
    throw WorkerError("malformed worker reply: " + line);
  }
  const auto type = reply.value("type", "");
  if (!reply.contains("id") || !reply["id"].is_number_unsigned() || reply["id"].get<std::uint64_t>() != id) {
    broken_ = true;
    throw WorkerError("worker reply id does not match request " + std::to_string(id) + ": " + line);
  }
  if (type == "error") throw WorkerError("worker error: " + reply.value("message", std::string{"(no message)"}));
  if (type != "result" || !reply.contains("value") || !reply["value"].is_number()) {
    broken_ = true;
    throw WorkerError("unexpected worker reply: " + line);
  }
  return reply["value"].get<double>();
}

int WorkerProcess::shutdown() {
  if (pid_ <= 0) return 0;
  if (!broken_) {
    try {
      write_line(R"({"type":"shutdown"})");
    } catch (const WorkerError&) {
    }
  }
  if (to_worker_ >= 0) ::close(to_worker_);
  to_worker_ = -1;
  int status = 0;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  while (true) {
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_ || r < 0) break;
    if (std::chrono::steady_clock::now() > deadline) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (from_worker_ >= 0) ::close(from_worker_);
  from_worker_ = -1;
  pid_ = -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void WorkerProcess::kill_now() {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
  if (to_worker_ >= 0) ::close(to_worker_);
  if (from_worker_ >= 0) ::close(from_worker_);
  to_worker_ = from_worker_ = -1;
}

// ---------------------------------------------------------------------------

ExternalObjective::ExternalObjective(std::vector<std::string> argv, std::size_t pool_size,
                                     std::chrono::milliseconds timeout) {
  if (pool_size == 0) throw ConfigError("external objective needs at least one worker");
  for (std::size_t i = 0; i < pool_size; ++i) {
    workers_.push_back(std::make_unique<WorkerProcess>(argv, timeout));
    const auto b = workers_.back()->bounds();
    if (i == 0) {
      bounds_ = b;
      name_ = workers_.back()->name();
    } else if (b.lower != bounds_.lower || b.upper != bounds_.upper) {
      throw WorkerError("workers in one pool declared different bounds");
    }
  }
  busy_.assign(pool_size, false);
}

double ExternalObjective::sample(const SearchSpace& space, const Solution& x, std::uint64_t seed) const {
  std::size_t slot = 0;
  std::uint64_t id = 0;
  {
    std::unique_lock lock(mutex_);
    freed_.wait(lock, [&] {
      for (std::size_t i = 0; i < busy_.size(); ++i) {
        if (!busy_[i]) {
          slot = i;
          return true;
        }
      }
      return false;
    });
    busy_[slot] = true;
    id = next_id_++;
  }
  struct Release {
    const ExternalObjective* self;
    std::size_t slot;
    ~Release() {
      {
        std::lock_guard lock(self->mutex_);
        self->busy_[slot] = false;
      }
      self->freed_.notify_one();
    }
  } release{this, slot};
  return workers_[slot]->evaluate(id, space, x, seed);
}

}  // namespace simopt
