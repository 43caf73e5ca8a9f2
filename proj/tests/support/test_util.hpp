#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

inline std::string fixtures_dir() {
#ifdef SPECTRA_FIXTURES_DIR
  return SPECTRA_FIXTURES_DIR;
#else
  return "fixtures";
#endif
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::vector<std::string> corpus_paths() {
  std::vector<std::string> out;
  for (const auto& entry :
       std::filesystem::directory_iterator(fixtures_dir() + "/corpus")) {
    if (entry.path().extension() == ".mc") out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace testutil
