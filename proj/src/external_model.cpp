#include "eagle/external_model.hpp"

#include <csignal>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace eagle {

namespace {

using json = nlohmann::json;

// Writing to a dead child must surface as EPIPE, not kill the process.
void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("external model: " + what); }

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("write to process failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

long long now_ms() {
  struct timespec ts;
  clock_gettime(CLOCK_MONOTONIC, &ts);
  return static_cast<long long>(ts.tv_sec) * 1000 + ts.tv_nsec / 1000000;
}

double parse_response_y(const json& msg) {
  if (!msg.contains("y") || !msg["y"].is_number()) fail("response line missing numeric 'y'");
  const double y = msg["y"].get<double>();
  if (!std::isfinite(y) || y < 0.0 || y > 1.0) {
    fail("response y = " + std::to_string(y) + " outside [0,1]; run aborted");
  }
  return y;
}

}  // namespace

void ExternalModelSpec::validate() const {
  if (argv.empty()) throw std::invalid_argument("ExternalModelSpec: argv must not be empty");
  if (timeout_ms <= 0) throw std::invalid_argument("ExternalModelSpec: timeout must be positive");
}

ExternalProcessModel::ExternalProcessModel(ExternalModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  ignore_sigpipe_once();
}

ExternalProcessModel::~ExternalProcessModel() { shutdown(); }

void ExternalProcessModel::ensure_spawned() {
  if (child_pid_ >= 0) return;

  int in_pipe[2];   // parent -> child stdin
  int out_pipe[2];  // child stdout -> parent
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
    fail(std::string("pipe creation failed: ") + std::strerror(errno));
  }

  const pid_t pid = ::fork();
  if (pid < 0) fail(std::string("fork failed: ") + std::strerror(errno));

  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    std::vector<char*> argv;
    argv.reserve(spec_.argv.size() + 1);
    for (auto& a : spec_.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    std::fprintf(stderr, "exec %s failed: %s\n", argv[0], std::strerror(errno));
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  child_pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  read_buffer_.clear();
}

void ExternalProcessModel::shutdown() noexcept {
  if (to_child_ >= 0) {
    // Blank line asks the server to exit; closing stdin is the fallback.
    const char nl = '\n';
    ssize_t ignored = ::write(to_child_, &nl, 1);
    (void)ignored;
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (child_pid_ >= 0) {
    int status = 0;
    for (int i = 0; i < 200; ++i) {
      const pid_t r = ::waitpid(child_pid_, &status, WNOHANG);
      if (r != 0) {
        child_pid_ = -1;
        return;
      }
      ::usleep(5000);
    }
    ::kill(child_pid_, SIGKILL);
    ::waitpid(child_pid_, &status, 0);
    child_pid_ = -1;
  }
}

double ExternalProcessModel::do_predict(const Eigen::VectorXd& z) {
  return do_batch_predict({z}).front();
}

std::vector<double> ExternalProcessModel::do_batch_predict(const std::vector<Eigen::VectorXd>& zs) {
  if (zs.empty()) return {};
  if (spec_.transport == ExternalModelSpec::Transport::stdio) return stdio_batch(zs);
  return csv_batch(zs);
}

std::vector<double> ExternalProcessModel::stdio_batch(const std::vector<Eigen::VectorXd>& zs) {
  ensure_spawned();

  const std::uint64_t base_id = next_id_;
  next_id_ += zs.size();

  std::string out;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    json req;
    req["id"] = base_id + i;
    req["z"] = std::vector<double>(zs[i].data(), zs[i].data() + zs[i].size());
    out += req.dump();
    out += '\n';
  }
  write_all(to_child_, out);

  std::vector<double> result(zs.size());
  std::vector<bool> seen(zs.size(), false);
  std::size_t remaining = zs.size();
  const long long deadline = now_ms() + spec_.timeout_ms;

  while (remaining > 0) {
    // Drain complete lines already buffered.
    std::size_t pos;
    while (remaining > 0 && (pos = read_buffer_.find('\n')) != std::string::npos) {
      std::string line = read_buffer_.substr(0, pos);
      read_buffer_.erase(0, pos + 1);
      if (line.empty()) continue;
      json msg;
      try {
        msg = json::parse(line);
      } catch (const json::parse_error& e) {
        fail("malformed response line '" + line + "': " + e.what());
      }
      if (!msg.contains("id") || !msg["id"].is_number_unsigned()) {
        fail("response line missing unsigned 'id': " + line);
      }
      const std::uint64_t id = msg["id"].get<std::uint64_t>();
      if (id < base_id || id >= base_id + zs.size()) {
        fail("response id " + std::to_string(id) + " does not match any in-flight request");
      }
      const std::size_t idx = id - base_id;
      if (seen[idx]) fail("duplicate response for id " + std::to_string(id));
      seen[idx] = true;
      result[idx] = parse_response_y(msg);
      --remaining;
    }
    if (remaining == 0) break;

    const long long budget = deadline - now_ms();
    if (budget <= 0) fail("timed out waiting for responses");
    struct pollfd pfd {
      from_child_, POLLIN, 0
    };
    const int pr = ::poll(&pfd, 1, static_cast<int>(budget));
    if (pr < 0) {
      if (errno == EINTR) continue;
      fail(std::string("poll failed: ") + std::strerror(errno));
    }
    if (pr == 0) fail("timed out waiting for responses");

    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("read from process failed: ") + std::strerror(errno));
    }
    if (n == 0) fail("process closed its output before answering all requests");
    read_buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  return result;
}

std::vector<double> ExternalProcessModel::csv_batch(const std::vector<Eigen::VectorXd>& zs) {
  const std::uint64_t base_id = next_id_;
  next_id_ += zs.size();
  const int d = static_cast<int>(zs.front().size());

  const std::string queries = spec_.scratch_dir + "/queries.csv";
  const std::string predictions = spec_.scratch_dir + "/predictions.csv";
  std::remove(predictions.c_str());
  {
    std::ofstream f(queries);
    if (!f) fail("cannot write " + queries);
    f << "id";
    for (int j = 0; j < d; ++j) f << ",z" << j;
    f << "\n";
    char buf[32];
    for (std::size_t i = 0; i < zs.size(); ++i) {
      f << (base_id + i);
      for (int j = 0; j < d; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", zs[i](j));
        f << ',' << buf;
      }
      f << "\n";
    }
  }

  const pid_t pid = ::fork();
  if (pid < 0) fail(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    std::vector<char*> argv;
    argv.reserve(spec_.argv.size() + 2);
    for (auto& a : spec_.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(const_cast<char*>(queries.c_str()));
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    std::fprintf(stderr, "exec %s failed: %s\n", argv[0], std::strerror(errno));
    ::_exit(127);
  }

  const long long deadline = now_ms() + spec_.timeout_ms;
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) fail(std::string("waitpid failed: ") + std::strerror(errno));
    if (now_ms() > deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      fail("csv batch timed out");
    }
    ::usleep(2000);
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    fail("csv process exited with status " + std::to_string(WEXITSTATUS(status)));
  }

  std::ifstream f(predictions);
  if (!f) fail("process did not produce " + predictions);
  std::string line;
  if (!std::getline(f, line) || line != "id,y") fail("predictions.csv has a bad header: " + line);
  std::vector<double> result(zs.size());
  std::vector<bool> seen(zs.size(), false);
  std::size_t remaining = zs.size();
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id_field, y_field;
    if (!std::getline(row, id_field, ',') || !std::getline(row, y_field)) {
      fail("malformed predictions row: " + line);
    }
    std::uint64_t id = 0;
    double y = 0.0;
    try {
      id = std::stoull(id_field);
      y = std::stod(y_field);
    } catch (const std::exception&) {
      fail("malformed predictions row: " + line);
    }
    if (id < base_id || id >= base_id + zs.size()) {
      fail("predictions row id " + std::to_string(id) + " does not match any request");
    }
    const std::size_t idx = id - base_id;
    if (seen[idx]) fail("duplicate predictions row for id " + std::to_string(id));
    if (!std::isfinite(y) || y < 0.0 || y > 1.0) {
      fail("response y = " + std::to_string(y) + " outside [0,1]; run aborted");
    }
    seen[idx] = true;
    result[idx] = y;
    --remaining;
  }
  if (remaining > 0) fail("predictions.csv is missing rows");
  return result;
}

}  // namespace eagle
