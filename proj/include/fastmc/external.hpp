#pragma once

#include <cctype>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "fastmc/csv.hpp"
#include "fastmc/error.hpp"
#include "fastmc/sde_sim.hpp"

namespace fastmc {

/// Response computed by an external program.
///
/// The command runs under /bin/sh -c once per path. It receives the path on
/// standard input in the path CSV format (a single path, path_id 0) and must
/// print one number on standard output and exit with status 0.
class ExternalRrf {
 public:
  explicit ExternalRrf(std::string command) : command_(std::move(command)) {
    if (command_.empty()) throw InputError("external rrf: empty command");
    std::signal(SIGPIPE, SIG_IGN);
  }

  const std::string& command() const { return command_; }

  double operator()(std::span<const double> path, const TimeGrid& grid) const {
    const std::size_t m = path.size() / grid.points();
    if (m == 0 || path.size() != m * grid.points()) throw InputError("external rrf: path layout does not match the grid");
    PathSet one{grid, m, 1, PathOrigin::euler_maruyama, std::vector<double>(path.begin(), path.end())};
    std::ostringstream csv_text;
    csv::write_paths(csv_text, one);
    const std::string output = run(csv_text.str());
    std::string_view text = output;
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    const auto value = csv::parse_number(text);
    if (!value || !std::isfinite(*value)) {
      throw SimulatorError("external rrf: command output is not a finite number: '" + std::string(text) + "'");
    }
    return *value;
  }

 private:
  std::string run(const std::string& input) const {
    int in_pipe[2], out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw SimulatorError(std::string("external rrf: pipe: ") + std::strerror(errno));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw SimulatorError(std::string("external rrf: pipe: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
      throw SimulatorError(std::string("external rrf: fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::signal(SIGPIPE, SIG_DFL);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    const int to_child = in_pipe[1];
    const int from_child = out_pipe[0];
    ::fcntl(to_child, F_SETFL, ::fcntl(to_child, F_GETFL) | O_NONBLOCK);

    std::string output;
    std::size_t written = 0;
    bool writing = true;
    if (input.empty()) {
      ::close(to_child);
      writing = false;
    }
    bool reading = true;
    char buf[4096];
    while (reading) {
      pollfd fds[2];
      int nfds = 0;
      fds[nfds++] = {from_child, POLLIN, 0};
      if (writing) fds[nfds++] = {to_child, POLLOUT, 0};
      if (::poll(fds, static_cast<nfds_t>(nfds), -1) < 0) {
        if (errno == EINTR) continue;
        break;
      }
      if (writing && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const ssize_t n = ::write(to_child, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 && errno != EAGAIN && errno != EINTR) written = input.size();  // child stopped reading
        if (written == input.size()) {
          ::close(to_child);
          writing = false;
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        const ssize_t n = ::read(from_child, buf, sizeof(buf));
        if (n > 0) {
          output.append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
          reading = false;
        }
      }
    }
    if (writing) ::close(to_child);
    ::close(from_child);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      throw SimulatorError("external rrf: command '" + command_ + "' failed with status " +
                           std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status)));
    }
    return output;
  }

  std::string command_;
};

}  // namespace fastmc
