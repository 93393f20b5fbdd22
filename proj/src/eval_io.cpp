#include "hsearch/eval_io.hpp"

#include <fstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/lexical_cast.hpp>

#include "hsearch/error.hpp"
#include "hsearch/synth.hpp"

namespace hsearch {

namespace {

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open " + path.string());
  return in;
}

std::vector<std::string> nonblank_lines(const std::filesystem::path& path) {
  auto in = open(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    boost::algorithm::trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

RankedList read_ranked_list(const std::filesystem::path& path) { return nonblank_lines(path); }

std::vector<double> read_numbers(const std::filesystem::path& path) {
  std::vector<double> out;
  for (const auto& line : nonblank_lines(path)) {
    try {
      out.push_back(boost::lexical_cast<double>(line));
    } catch (const boost::bad_lexical_cast&) {
      throw ParseError(path.string() + ": '" + line + "' is not a number");
    }
  }
  return out;
}

AlignedLabelings read_aligned_labels(const std::filesystem::path& truth,
                                     const std::filesystem::path& predicted) {
  auto tin = open(truth);
  auto pin = open(predicted);
  const auto t = read_labels(tin);
  const auto p = read_labels(pin);
  AlignedLabelings out;
  for (const auto& [key, label] : t) {
    auto f = p.find(key);
    if (f == p.end()) throw DomainMismatch("key '" + key + "' missing from " + predicted.string());
    out.keys.push_back(key);
    out.truth.push_back(label);
    out.predicted.push_back(f->second);
  }
  if (p.size() != t.size())
    throw DomainMismatch(predicted.string() + " has keys missing from " + truth.string());
  return out;
}

}  // namespace hsearch
