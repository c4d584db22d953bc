#pragma once

#include "srqa/error.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <string>
#include <string_view>

namespace srqa {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string stderr_text;
};

/// Quotes a string for /bin/sh.
inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

/// Runs `command` through /bin/sh in its own process group. stdout is
/// discarded and stderr captured. On timeout the whole group is killed.
inline ProcessResult run_shell(const std::string& command, std::chrono::milliseconds timeout) {
  int err_pipe[2];
  if (pipe2(err_pipe, O_CLOEXEC) != 0) fail(ErrorKind::IoError, "pipe() failed");

  const pid_t pid = fork();
  if (pid < 0) {
    close(err_pipe[0]);
    close(err_pipe[1]);
    fail(ErrorKind::IoError, "fork() failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    const int devnull = open("/dev/null", O_RDWR | O_CLOEXEC);
    if (devnull >= 0) {
      dup2(devnull, STDIN_FILENO);
      dup2(devnull, STDOUT_FILENO);
    }
    dup2(err_pipe[1], STDERR_FILENO);
    close(err_pipe[0]);
    close(err_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  close(err_pipe[1]);

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  bool pipe_open = true;
  int status = 0;
  bool exited = false;
  while (!exited) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    if (pipe_open) {
      pollfd pfd{err_pipe[0], POLLIN, 0};
      const auto wait_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      const int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(wait_ms, 50)));
      if (ready > 0) {
        char buf[4096];
        const ssize_t n = read(err_pipe[0], buf, sizeof(buf));
        if (n > 0) {
          if (result.stderr_text.size() < (1u << 20)) result.stderr_text.append(buf, n);
        } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
          pipe_open = false;
        }
      }
    } else {
      usleep(5000);
    }
    const pid_t w = waitpid(pid, &status, WNOHANG);
    if (w == pid) exited = true;
  }
  // Drain whatever is left once the child is gone.
  if (pipe_open && !result.timed_out) {
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);
    char buf[4096];
    ssize_t n;
    while ((n = read(err_pipe[0], buf, sizeof(buf))) > 0) result.stderr_text.append(buf, n);
  }
  close(err_pipe[0]);
  if (!result.timed_out) {
    if (WIFEXITED(status)) {
      result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.exit_code = 128 + WTERMSIG(status);
    }
  }
  return result;
}

} // namespace srqa
