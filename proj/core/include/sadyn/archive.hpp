#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sadyn/attention.hpp"

namespace sadyn {

/// JSON document holding every weight matrix as nested row-major arrays,
/// with shapes, the generating seed and a format version. Doubles are
/// written with 17 significant digits, so save/load is bit-exact.
struct WeightArchive {
  static constexpr int kVersion = 1;

  std::uint64_t seed = 0;
  MSAWeights weights;
  std::optional<OmegaBank> bank;
};

std::string archive_to_json(const WeightArchive& a);
/// Raises IoError on malformed documents and ShapeError when a matrix does
/// not match its declared shape.
WeightArchive archive_from_json(const std::string& text);

void save_archive(const std::string& path, const WeightArchive& a);
WeightArchive load_archive(const std::string& path);

}  // namespace sadyn
