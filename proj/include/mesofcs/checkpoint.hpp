#pragma once

#include <cstdint>
#include <filesystem>

#include "mesofcs/common.hpp"

namespace mesofcs {

/// Binary dump of a covariance trajectory point, little-endian:
///
///   8 bytes   magic "MFCSCKP1"
///   u32       format version (1)
///   u64       model fingerprint
///   i64       dimension n
///   f64       time t
///   n*n c128  C, column-major (real, imaginary)
struct Checkpoint {
  std::uint64_t model_hash = 0;
  double time = 0.0;
  CMatrix covariance;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws ConfigError on a bad header, version, hash or dimension mismatch.
Checkpoint read_checkpoint(const std::filesystem::path& path, std::uint64_t expected_hash,
                           Index expected_dimension);

}  // namespace mesofcs
