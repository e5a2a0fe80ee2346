// Copyright 2026 The bosal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "scorer.hpp"

namespace bosal::detail {

namespace {

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  static constexpr char alphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) |
                            bytes[i + 2];
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back(alphabet[n & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t n = bytes[i] << 16;
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

}  // namespace

std::string build_request_json(std::uint64_t id, const Image& image,
                               const std::string& target) {
  std::vector<std::uint8_t> bytes(image.size());
  const auto& data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(data[i], 0.0, 1.0) * 255.0));
  }
  nlohmann::json req{{"id", id},
                     {"image", base64_encode(bytes)},
                     {"width", image.width()},
                     {"height", image.height()},
                     {"channels", image.channels()},
                     {"target", target}};
  return req.dump();
}

double parse_response_json(const std::string& line,
                           std::uint64_t expected_id) {
  nlohmann::json res;
  try {
    res = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw QueryError(std::string("malformed model response: ") + e.what(),
                     line);
  }
  if (!res.contains("id") || !res.contains("score") ||
      !res["score"].is_number()) {
    throw QueryError("model response missing id/score", line);
  }
  if (res["id"].get<std::uint64_t>() != expected_id) {
    throw QueryError("model response id mismatch", line);
  }
  const double value = res["score"].get<double>();
  if (!std::isfinite(value)) {
    throw QueryError("model returned non-finite score", line);
  }
  return value;
}

namespace {

// Line-delimited JSON over the child's stdin/stdout. The child is started
// on the first query; requests are serialized (one in flight). A timeout or
// broken pipe kills the child so the next query restarts from a clean state.
class SubprocessScorer final : public Scorer {
public:
  SubprocessScorer(std::vector<std::string> argv, std::string target,
                   std::chrono::seconds timeout)
      : Scorer(ModelKind::subprocess, std::move(target), -1, -1),
        argv_(std::move(argv)), timeout_(timeout) {
    if (argv_.empty()) {
      throw std::invalid_argument("subprocess model needs a command");
    }
  }

  ~SubprocessScorer() override { shutdown(); }

protected:
  double evaluate(const Image& image) override {
    std::lock_guard<std::mutex> lock(io_mutex_);
    if (pid_ < 0) {
      spawn();
    }
    const std::uint64_t id = next_id_++;
    const std::string request =
        build_request_json(id, image, target()) + "\n";
    try {
      write_all(request);
      const std::string line = read_line();
      return parse_response_json(line, id);
    } catch (const QueryError&) {
      kill_child();
      throw;
    }
  }

private:
  void spawn() {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw QueryError(std::string("pipe: ") + std::strerror(errno));
    }
    const pid_t pid = fork();
    if (pid < 0) {
      throw QueryError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      std::vector<char*> argv;
      argv.reserve(argv_.size() + 1);
      for (auto& a : argv_) {
        argv.push_back(a.data());
      }
      argv.push_back(nullptr);
      execvp(argv[0], argv.data());
      _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];
    fcntl(stdin_fd_, F_SETFD, FD_CLOEXEC);
    fcntl(stdout_fd_, F_SETFD, FD_CLOEXEC);
    pid_ = pid;
    buffer_.clear();
  }

  // A child that exits without reading must surface as EPIPE, not as a
  // fatal SIGPIPE, so the signal is masked for the duration of the write
  // and consumed if the write raised it.
  void write_all(const std::string& text) {
    sigset_t pipe_set;
    sigemptyset(&pipe_set);
    sigaddset(&pipe_set, SIGPIPE);
    sigset_t old_set;
    pthread_sigmask(SIG_BLOCK, &pipe_set, &old_set);
    int error = 0;
    std::size_t written = 0;
    while (written < text.size()) {
      const ssize_t n = ::write(stdin_fd_, text.data() + written,
                                text.size() - written);
      if (n < 0) {
        if (errno == EINTR) {
          continue;
        }
        error = errno;
        break;
      }
      written += static_cast<std::size_t>(n);
    }
    if (error == EPIPE) {
      const struct timespec zero = {0, 0};
      while (sigtimedwait(&pipe_set, nullptr, &zero) == SIGPIPE) {
      }
    }
    pthread_sigmask(SIG_SETMASK, &old_set, nullptr);
    if (error != 0) {
      throw QueryError(std::string("write to model process: ") +
                       std::strerror(error));
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto remaining = std::chrono::duration_cast<
          std::chrono::milliseconds>(deadline -
                                     std::chrono::steady_clock::now());
      if (remaining.count() <= 0) {
        throw QueryError("model process timed out after " +
                             std::to_string(timeout_.count()) + "s",
                         buffer_);
      }
      pollfd pfd{stdout_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (rc < 0) {
        if (errno == EINTR) {
          continue;
        }
        throw QueryError(std::string("poll: ") + std::strerror(errno));
      }
      if (rc == 0) {
        continue;  // deadline re-checked above
      }
      char chunk[4096];
      const ssize_t n = ::read(stdout_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) {
          continue;
        }
        throw QueryError(std::string("read from model process: ") +
                         std::strerror(errno));
      }
      if (n == 0) {
        throw QueryError("model process closed its output", buffer_);
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void kill_child() {
    if (pid_ < 0) {
      return;
    }
    ::close(stdin_fd_);
    ::close(stdout_fd_);
    ::kill(pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }

  void shutdown() {
    std::lock_guard<std::mutex> lock(io_mutex_);
    if (pid_ < 0) {
      return;
    }
    ::close(stdin_fd_);  // EOF lets a well-behaved child exit
    ::close(stdout_fd_);
    for (int i = 0; i < 20; ++i) {
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }

  std::vector<std::string> argv_;
  std::chrono::seconds timeout_;
  std::mutex io_mutex_;
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 1;
};

class HttpScorer final : public Scorer {
public:
  HttpScorer(std::string url, std::string target,
             std::chrono::seconds timeout)
      : Scorer(ModelKind::http, std::move(target), -1, -1),
        timeout_(timeout) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos ||
        url.substr(0, scheme_end) != "http") {
      throw std::invalid_argument("model URL must be http://host[:port]/path");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      base_ = url;
      path_ = "/";
    } else {
      base_ = url.substr(0, path_start);
      path_ = url.substr(path_start);
    }
  }

protected:
  double evaluate(const Image& image) override {
    std::lock_guard<std::mutex> lock(io_mutex_);
    const std::uint64_t id = next_id_++;
    httplib::Client client(base_);
    client.set_connection_timeout(timeout_.count(), 0);
    client.set_read_timeout(timeout_.count(), 0);
    client.set_write_timeout(timeout_.count(), 0);
    const auto res = client.Post(path_, build_request_json(id, image, target()),
                                 "application/json");
    if (!res) {
      throw QueryError("HTTP request to " + base_ + " failed: " +
                       httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw QueryError("HTTP status " + std::to_string(res->status) +
                           " from " + base_,
                       res->body);
    }
    return parse_response_json(res->body, id);
  }

private:
  std::chrono::seconds timeout_;
  std::mutex io_mutex_;
  std::string base_;
  std::string path_;
  std::uint64_t next_id_ = 1;
};

}  // namespace

std::shared_ptr<Scorer> make_subprocess_scorer(std::vector<std::string> argv,
                                               std::string target,
                                               std::chrono::seconds timeout) {
  return std::make_shared<SubprocessScorer>(std::move(argv),
                                            std::move(target), timeout);
}

std::shared_ptr<Scorer> make_http_scorer(std::string url, std::string target,
                                         std::chrono::seconds timeout) {
  return std::make_shared<HttpScorer>(std::move(url), std::move(target),
                                      timeout);
}

}  // namespace bosal::detail
