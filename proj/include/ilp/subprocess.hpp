#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <string>
#include <vector>

namespace ilp {

struct ProcessResult {
  int exit_code = -1;
  bool spawned = false;
  bool timed_out = false;
  std::string out;
  std::string err;
};

/// Whitespace-split with minimal double-quote support.
inline std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> argv;
  std::string cur;
  bool quoted = false, have = false;
  for (char c : command) {
    if (c == '"') {
      quoted = !quoted;
      have = true;
      continue;
    }
    if (!quoted && (c == ' ' || c == '\t')) {
      if (have || !cur.empty()) argv.push_back(cur);
      cur.clear();
      have = false;
      continue;
    }
    cur += c;
  }
  if (have || !cur.empty()) argv.push_back(cur);
  return argv;
}

/// Run a child process: `input` on stdin, stdout/stderr captured, wall-clock
/// timeout in milliseconds (0 = none). Timeout kills the child.
inline ProcessResult run_process(const std::vector<std::string>& argv,
                                 const std::string& input, int timeout_ms = 0) {
  ProcessResult result;
  if (argv.empty()) return result;

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) || pipe(out_pipe) || pipe(err_pipe)) return result;

  pid_t pid = fork();
  if (pid < 0) return result;
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(in_pipe[0]); close(in_pipe[1]);
    close(out_pipe[0]); close(out_pipe[1]);
    close(err_pipe[0]); close(err_pipe[1]);
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
  }

  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  std::size_t written = 0;
  bool stdin_open = true, stdout_open = true, stderr_open = true;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(timeout_ms > 0 ? timeout_ms : 0);

  while (stdout_open || stderr_open || stdin_open) {
    if (timeout_ms > 0 && std::chrono::steady_clock::now() > deadline) {
      kill(pid, SIGKILL);
      result.timed_out = true;
      break;
    }
    struct pollfd fds[3];
    int nfds = 0;
    int idx_in = -1, idx_out = -1, idx_err = -1;
    if (stdin_open) {
      idx_in = nfds;
      fds[nfds++] = {in_pipe[1], POLLOUT, 0};
    }
    if (stdout_open) {
      idx_out = nfds;
      fds[nfds++] = {out_pipe[0], POLLIN, 0};
    }
    if (stderr_open) {
      idx_err = nfds;
      fds[nfds++] = {err_pipe[0], POLLIN, 0};
    }
    int rc = poll(fds, static_cast<nfds_t>(nfds), 100);
    if (rc < 0 && errno != EINTR) break;

    char buf[4096];
    if (idx_in >= 0 && (fds[idx_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (written >= input.size() || (fds[idx_in].revents & (POLLERR | POLLHUP))) {
        close(in_pipe[1]);
        stdin_open = false;
      } else {
        ssize_t n = write(in_pipe[1], input.data() + written, input.size() - written);
        if (n > 0) {
          written += static_cast<std::size_t>(n);
          if (written >= input.size()) {
            close(in_pipe[1]);
            stdin_open = false;
          }
        } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
          close(in_pipe[1]);
          stdin_open = false;
        }
      }
    }
    if (idx_out >= 0 && (fds[idx_out].revents & (POLLIN | POLLHUP))) {
      ssize_t n = read(out_pipe[0], buf, sizeof buf);
      if (n > 0) {
        result.out.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
        close(out_pipe[0]);
        stdout_open = false;
      }
    }
    if (idx_err >= 0 && (fds[idx_err].revents & (POLLIN | POLLHUP))) {
      ssize_t n = read(err_pipe[0], buf, sizeof buf);
      if (n > 0) {
        result.err.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
        close(err_pipe[0]);
        stderr_open = false;
      }
    }
  }
  if (stdin_open) close(in_pipe[1]);
  if (stdout_open) close(out_pipe[0]);
  if (stderr_open) close(err_pipe[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  result.spawned = true;
  if (result.timed_out) {
    result.exit_code = -1;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
    if (result.exit_code == 127) result.spawned = false;  // exec failed
  } else {
    result.exit_code = -1;
  }
  return result;
}

}  // namespace ilp
