#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>

namespace cliutil {

namespace fs = std::filesystem;

// Runs the CLI with `args`, output discarded; returns its exit status.
inline int run(const std::string& args) {
  const std::string cmd = std::string("\"") + MRDPG_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

inline fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::path(MRDPG_TEST_TMP) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Every regular file under `root`, relative path -> bytes.
inline bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t count = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) return false;
    ++count;
  }
  std::size_t other = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) other += e.is_regular_file();
  return count == other && count > 0;
}

}  // namespace cliutil
