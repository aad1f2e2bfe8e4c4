#include "formine/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "formine/errors.hpp"

namespace formine {

namespace {

void set_cloexec(int fd) { fcntl(fd, F_SETFD, FD_CLOEXEC); }

}  // namespace

RunResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                      std::chrono::milliseconds timeout, const std::string& stdin_data) {
  if (argv.empty()) raise(ErrorCode::bad_argument, "run_process: empty argv");

  int out_pipe[2];
  int in_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(in_pipe) != 0)
    raise(ErrorCode::io_error, "pipe() failed");

  pid_t pid = fork();
  if (pid < 0) raise(ErrorCode::io_error, "fork() failed");

  if (pid == 0) {
    // child
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(out_pipe[1], STDERR_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }

  close(in_pipe[0]);
  close(out_pipe[1]);
  set_cloexec(in_pipe[1]);
  set_cloexec(out_pipe[0]);

  // feed stdin fully before reading; render inputs are small
  size_t written = 0;
  while (written < stdin_data.size()) {
    ssize_t n = write(in_pipe[1], stdin_data.data() + written, stdin_data.size() - written);
    if (n <= 0) break;
    written += static_cast<size_t>(n);
  }
  close(in_pipe[1]);

  RunResult result;
  auto deadline = std::chrono::steady_clock::now() + timeout;
  char buffer[4096];
  bool child_done = false;
  while (true) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      result.timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
    struct pollfd pfd{out_pipe[0], POLLIN, 0};
    int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 200)));
    if (rc > 0) {
      ssize_t n = read(out_pipe[0], buffer, sizeof buffer);
      if (n > 0) {
        result.output.append(buffer, static_cast<size_t>(n));
        continue;
      }
      if (n == 0) break;  // EOF: child closed its end
      if (errno != EINTR && errno != EAGAIN) break;
    }
    // poll timeout slice: check whether the child exited without closing fds
    int status = 0;
    pid_t w = waitpid(pid, &status, WNOHANG);
    if (w == pid) {
      child_done = true;
      result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      // drain whatever is left
      ssize_t n;
      while ((n = read(out_pipe[0], buffer, sizeof buffer)) > 0)
        result.output.append(buffer, static_cast<size_t>(n));
      break;
    }
  }
  close(out_pipe[0]);
  if (!child_done) {
    if (result.timed_out) {
      int status = 0;
      waitpid(pid, &status, 0);  // already killed above
    } else {
      // stdout is closed but the child may still be running; honor the deadline
      while (true) {
        int status = 0;
        pid_t w = waitpid(pid, &status, WNOHANG);
        if (w == pid) {
          result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
          break;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
          result.timed_out = true;
          kill(pid, SIGKILL);
          waitpid(pid, &status, 0);
          break;
        }
        usleep(10000);
      }
    }
  }
  return result;
}

bool program_exists(const std::string& name_or_path) {
  if (name_or_path.empty()) return false;
  if (name_or_path.find('/') != std::string::npos)
    return access(name_or_path.c_str(), X_OK) == 0;
  const char* path_env = std::getenv("PATH");
  if (!path_env) return false;
  std::stringstream ss(path_env);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    std::string full = dir + "/" + name_or_path;
    if (access(full.c_str(), X_OK) == 0) return true;
  }
  return false;
}

std::vector<std::string> split_command(
    const std::string& command_template,
    const std::vector<std::pair<std::string, std::string>>& substitutions) {
  std::vector<std::string> parts;
  std::stringstream ss(command_template);
  std::string part;
  while (ss >> part) {
    for (const auto& [key, value] : substitutions) {
      std::string placeholder = "{" + key + "}";
      size_t pos;
      while ((pos = part.find(placeholder)) != std::string::npos)
        part.replace(pos, placeholder.size(), value);
    }
    parts.push_back(part);
  }
  return parts;
}

}  // namespace formine
