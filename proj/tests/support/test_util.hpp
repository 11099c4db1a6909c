#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace pesto::testing {

inline std::filesystem::path fixture_dir() { return PESTO_FIXTURE_DIR; }
inline std::filesystem::path config_dir() { return PESTO_CONFIG_DIR; }

/// Scratch directory removed on destruction.
class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("pesto-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string shell_quote(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  return out + "'";
}

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs argv with extra environment variables (GITHUB_TOKEN and
/// PESTO_API_BASE are cleared unless given), capturing both streams.
inline ProcessResult run_process(const std::vector<std::string> &argv,
                                 const std::map<std::string, std::string> &env = {},
                                 const std::string &stdin_text = {}) {
  TempDir scratch;
  std::string command = "env -u GITHUB_TOKEN -u PESTO_API_BASE";
  for (const auto &[key, value] : env) {
    command += " " + key + "=" + shell_quote(value);
  }
  for (const auto &arg : argv) {
    command += " " + shell_quote(arg);
  }
  const auto in_path = scratch / "stdin";
  write_file(in_path, stdin_text);
  command += " < " + shell_quote(in_path.string()) + " > " +
             shell_quote((scratch / "stdout").string()) + " 2> " +
             shell_quote((scratch / "stderr").string());
  const int status = std::system(command.c_str());
  ProcessResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(scratch / "stdout");
  result.err = read_file(scratch / "stderr");
  return result;
}

/// A child process with stdout/stderr redirected to files; killed with
/// SIGTERM on destruction if still running.
class BackgroundProcess {
public:
  explicit BackgroundProcess(const std::vector<std::string> &argv) {
    out_path_ = dir_ / "stdout";
    err_path_ = dir_ / "stderr";
    pid_ = ::fork();
    if (pid_ == 0) {
      const int out = ::open(out_path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      const int err = ::open(err_path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      ::dup2(out, 1);
      ::dup2(err, 2);
      ::unsetenv("GITHUB_TOKEN");
      std::vector<char *> args;
      for (const auto &a : argv) {
        args.push_back(const_cast<char *>(a.c_str()));
      }
      args.push_back(nullptr);
      ::execv(args[0], args.data());
      ::_exit(127);
    }
  }
  ~BackgroundProcess() {
    if (!exited_) {
      ::kill(pid_, SIGKILL);
      wait();
    }
  }
  BackgroundProcess(const BackgroundProcess &) = delete;
  BackgroundProcess &operator=(const BackgroundProcess &) = delete;

  void terminate() { ::kill(pid_, SIGTERM); }

  /// Exit code, or -1 for a signal.
  int wait() {
    if (!exited_) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
      exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      exited_ = true;
    }
    return exit_code_;
  }

  /// True once the process has exited (non-blocking).
  bool finished() {
    if (exited_) {
      return true;
    }
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      exited_ = true;
    }
    return exited_;
  }

  std::string out() const { return read_file(out_path_); }
  std::string err() const { return read_file(err_path_); }

private:
  TempDir dir_;
  std::filesystem::path out_path_;
  std::filesystem::path err_path_;
  pid_t pid_ = -1;
  bool exited_ = false;
  int exit_code_ = -1;
};

inline int free_port() {
  static std::atomic<int> next{20000 + static_cast<int>(::getpid() % 20000)};
  return next++;
}

} // namespace pesto::testing
