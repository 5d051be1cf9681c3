#pragma once

#include <sys/types.h>

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Child process started through `/bin/sh -c` with piped stdin/stdout.
// stderr is inherited. The destructor closes stdin and reaps the child,
// escalating to SIGTERM then SIGKILL if it does not exit on its own.
class Subprocess {
 public:
  explicit Subprocess(const std::string& command);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  // Writes `input` while concurrently reading stdout until `lines` complete
  // lines have arrived. Fewer lines before EOF, or a timeout, throws
  // ProtocolError carrying the number of lines actually received.
  std::vector<std::string> exchange(std::string_view input, std::size_t lines,
                                    std::chrono::milliseconds timeout);

  void close_stdin();

  // Blocks until the child exits; returns its exit status (128+signal when
  // killed).
  int wait();

  pid_t pid() const { return pid_; }

 private:
  void terminate(std::chrono::milliseconds grace);

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::string pending_;  // stdout bytes read past the last full line
  bool reaped_ = false;
  int status_ = 0;
};

struct CommandResult {
  int exit_code = 0;
  std::string out;
};

// Runs `command` to completion, feeding `input` on stdin and collecting all
// of stdout. Throws IoError on spawn failure or timeout.
CommandResult run_command(const std::string& command, std::string_view input,
                          std::chrono::milliseconds timeout);

}  // namespace forge
