#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <sstream>

#include "fmlog/smt.hpp"

extern char** environ;

namespace fmlog::smt {

namespace {

bool executable(const std::string& p) { return ::access(p.c_str(), X_OK) == 0 && !std::filesystem::is_directory(p); }

std::optional<std::string> searchPath(const std::string& name) {
  if (name.find('/') != std::string::npos) return executable(name) ? std::optional(name) : std::nullopt;
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::stringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    std::string candidate = dir + "/" + name;
    if (executable(candidate)) return candidate;
  }
  return std::nullopt;
}

[[noreturn]] void unavailable(const std::string& path, const std::string& why) {
  throw Error(ErrorKind::BackendUnavailable, "external solver " + path + ": " + why);
}

struct Fd {
  int fd = -1;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

}  // namespace

std::optional<std::string> findExternalSolver(const std::string& explicitPath) {
  if (!explicitPath.empty()) return searchPath(explicitPath);
  if (const char* env = std::getenv("FMLOG_SMT_SOLVER"); env && *env) return searchPath(env);
  return searchPath("z3");
}

ExternalBackend::ExternalBackend(std::string path) : path_(std::move(path)) {
  // A solver that exits early must not take the whole process down with it.
  static std::once_flag ignorePipe;
  std::call_once(ignorePipe, [] { std::signal(SIGPIPE, SIG_IGN); });
  std::string base = std::filesystem::path(path_).filename().string();
  if (base == "z3" || base == "z3.exe") extraArgs_.push_back("-in");
}

SatResult ExternalBackend::checkSat(TermId formula) {
  std::string script = toSmtLib(formula);

  int toChild[2];
  int fromChild[2];
  if (::pipe2(toChild, O_CLOEXEC) != 0) unavailable(path_, std::strerror(errno));
  Fd childIn{toChild[0]}, parentOut{toChild[1]};
  if (::pipe2(fromChild, O_CLOEXEC) != 0) unavailable(path_, std::strerror(errno));
  Fd parentIn{fromChild[0]}, childOut{fromChild[1]};

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, childIn.fd, 0);
  posix_spawn_file_actions_adddup2(&actions, childOut.fd, 1);
  posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);

  std::vector<char*> argv;
  argv.push_back(path_.data());
  for (std::string& a : extraArgs_) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  int rc = posix_spawnp(&pid, path_.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  childIn.reset();
  childOut.reset();
  if (rc != 0) unavailable(path_, std::string("cannot start: ") + std::strerror(rc));

  std::size_t written = 0;
  while (written < script.size()) {
    ssize_t n = ::write(parentOut.fd, script.data() + written, script.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;  // the exit status below reports the failure
    written += static_cast<std::size_t>(n);
  }
  parentOut.reset();

  std::string output;
  char buf[4096];
  while (true) {
    ssize_t n = ::read(parentIn.fd, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }

  std::istringstream words(output);
  std::string verdict;
  words >> verdict;
  if (verdict == "sat") return SatResult::Sat;
  if (verdict == "unsat") return SatResult::Unsat;
  if (verdict == "unknown") unavailable(path_, "answered unknown");
  if (WIFSIGNALED(status)) unavailable(path_, "killed by signal " + std::to_string(WTERMSIG(status)));
  std::string shown = output.substr(0, 200);
  while (!shown.empty() && std::isspace(static_cast<unsigned char>(shown.back()))) shown.pop_back();
  unavailable(path_, "unexpected output '" + shown + "' (exit status " +
                         std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) + ")");
}

}  // namespace fmlog::smt
