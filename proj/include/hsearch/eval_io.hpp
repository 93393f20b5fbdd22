#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hsearch/metrics.hpp"

namespace hsearch {

// One element per non-blank line, surrounding whitespace trimmed.
RankedList read_ranked_list(const std::filesystem::path& path);

// One number per non-blank line.
std::vector<double> read_numbers(const std::filesystem::path& path);

struct AlignedLabelings {
  Labeling truth;
  Labeling predicted;
  std::vector<std::string> keys;
};

// Reads two "key,label" files and aligns them by key. Throws DomainMismatch
// when the key sets differ.
AlignedLabelings read_aligned_labels(const std::filesystem::path& truth,
                                     const std::filesystem::path& predicted);

}  // namespace hsearch
