#include "forge/common/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "forge/common/error.hpp"

extern char** environ;

namespace forge {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static const bool once = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

struct Spawned {
  pid_t pid;
  int in;
  int out;
};

Spawned spawn_shell(const std::string& command) {
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw IoError(std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw IoError(std::string("pipe: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr,
                               const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw IoError("spawn '" + command + "': " + std::strerror(rc));
  }
  ::fcntl(in_pipe[1], F_SETFL, ::fcntl(in_pipe[1], F_GETFL) | O_NONBLOCK);
  return {pid, in_pipe[1], out_pipe[0]};
}

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

}  // namespace

Subprocess::Subprocess(const std::string& command) {
  const Spawned s = spawn_shell(command);
  pid_ = s.pid;
  stdin_fd_ = s.in;
  stdout_fd_ = s.out;
}

Subprocess::~Subprocess() {
  close_stdin();
  terminate(std::chrono::milliseconds(2000));
  close_fd(stdout_fd_);
}

void Subprocess::close_stdin() { close_fd(stdin_fd_); }

std::vector<std::string> Subprocess::exchange(
    std::string_view input, std::size_t lines,
    std::chrono::milliseconds timeout) {
  std::vector<std::string> out;
  const auto deadline = Clock::now() + timeout;
  std::size_t written = 0;

  auto take_lines = [&] {
    std::size_t pos;
    while (out.size() < lines && (pos = pending_.find('\n')) != std::string::npos) {
      std::string line = pending_.substr(0, pos);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out.push_back(std::move(line));
      pending_.erase(0, pos + 1);
    }
  };
  take_lines();

  while (out.size() < lines) {
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {stdout_fd_, POLLIN, 0};
    const bool want_write = written < input.size() && stdin_fd_ >= 0;
    if (want_write) fds[n++] = {stdin_fd_, POLLOUT, 0};
    const int ready = ::poll(fds, n, remaining_ms(deadline));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) {
      throw ProtocolError("timed out after " + std::to_string(out.size()) +
                          " of " + std::to_string(lines) + " lines");
    }
    if (want_write && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = ::write(stdin_fd_, input.data() + written,
                                input.size() - written);
      if (w > 0) {
        written += static_cast<std::size_t>(w);
      } else if (w < 0 && errno != EAGAIN && errno != EINTR) {
        // Child closed its stdin; whatever it already printed still counts.
        close_stdin();
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      const ssize_t r = ::read(stdout_fd_, buf, sizeof buf);
      if (r > 0) {
        pending_.append(buf, static_cast<std::size_t>(r));
        take_lines();
      } else if (r == 0) {
        throw ProtocolError("process exited after " +
                            std::to_string(out.size()) + " of " +
                            std::to_string(lines) + " lines");
      } else if (errno != EINTR && errno != EAGAIN) {
        throw IoError(std::string("read: ") + std::strerror(errno));
      }
    }
  }
  return out;
}

int Subprocess::wait() {
  if (!reaped_) {
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    status_ = decode_status(status);
    reaped_ = true;
  }
  return status_;
}

void Subprocess::terminate(std::chrono::milliseconds grace) {
  if (reaped_ || pid_ <= 0) return;
  const auto deadline = Clock::now() + grace;
  int status = 0;
  for (int sig : {0, SIGTERM, SIGKILL}) {
    if (sig != 0) ::kill(pid_, sig);
    const auto until = sig == SIGKILL ? Clock::now() + grace : deadline;
    while (Clock::now() < until) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || r < 0) {
        status_ = decode_status(status);
        reaped_ = true;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }
  ::waitpid(pid_, &status, 0);
  status_ = decode_status(status);
  reaped_ = true;
}

CommandResult run_command(const std::string& command, std::string_view input,
                          std::chrono::milliseconds timeout) {
  Spawned s = spawn_shell(command);
  const auto deadline = Clock::now() + timeout;
  CommandResult result;
  std::size_t written = 0;
  if (input.empty()) close_fd(s.in);
  while (s.out >= 0) {
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {s.out, POLLIN, 0};
    if (s.in >= 0) fds[n++] = {s.in, POLLOUT, 0};
    const int ready = ::poll(fds, n, remaining_ms(deadline));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) {
      ::kill(s.pid, SIGKILL);
      ::waitpid(s.pid, nullptr, 0);
      close_fd(s.in);
      close_fd(s.out);
      throw IoError("command timed out: " + command);
    }
    if (s.in >= 0 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w =
          ::write(s.in, input.data() + written, input.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if ((w < 0 && errno != EAGAIN && errno != EINTR) ||
          written == input.size()) {
        close_fd(s.in);
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      const ssize_t r = ::read(s.out, buf, sizeof buf);
      if (r > 0) {
        result.out.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (errno != EINTR && errno != EAGAIN)) {
        close_fd(s.out);
      }
    }
  }
  close_fd(s.in);
  int status = 0;
  while (::waitpid(s.pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = decode_status(status);
  return result;
}

}  // namespace forge
