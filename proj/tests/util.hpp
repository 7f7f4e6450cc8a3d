#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mpst/mpst.hpp"

namespace mpsttest {

inline std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpusPath(const std::string& name) {
  return std::string(MPST_CORPUS_DIR) + "/" + name;
}

inline mpst::Program loadCorpus(const std::string& name) {
  auto res = mpst::parse(readFile(corpusPath(name)));
  if (!res.program) {
    std::string msg = "parse failed for " + name + ":";
    for (auto& d : res.diagnostics)
      msg += " " + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) + ": " + d.message;
    throw std::runtime_error(msg);
  }
  return *res.program;
}

// First protocol of a corpus file, the root for beh/strategy runs.
inline mpst::Protocol corpusProtocol(const std::string& name) {
  auto prog = loadCorpus(name);
  if (prog.protocols.empty()) throw std::runtime_error(name + " has no protocol");
  return prog.protocols[0].second;
}

}  // namespace mpsttest
