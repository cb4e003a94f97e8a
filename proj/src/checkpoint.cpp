#include "mesofcs/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace mesofcs {

static_assert(std::endian::native == std::endian::little, "checkpoints assume little-endian hosts");

namespace {

constexpr std::array<char, 8> kMagic{'M', 'F', 'C', 'S', 'C', 'K', 'P', '1'};

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& origin) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw ConfigError(origin + ": truncated checkpoint");
  return value;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot write checkpoint");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, cp.model_hash);
  put<std::int64_t>(out, cp.covariance.rows());
  put<double>(out, cp.time);
  out.write(reinterpret_cast<const char*>(cp.covariance.data()),
            static_cast<std::streamsize>(sizeof(Complex) * cp.covariance.size()));
  if (!out) throw Error(path.string() + ": write failed");
}

Checkpoint read_checkpoint(const std::filesystem::path& path, std::uint64_t expected_hash,
                           Index expected_dimension) {
  const std::string origin = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(origin + ": cannot open checkpoint");
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw ConfigError(origin + ": not a checkpoint file");
  const auto version = get<std::uint32_t>(in, origin);
  if (version != kCheckpointVersion)
    throw ConfigError(origin + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint cp;
  cp.model_hash = get<std::uint64_t>(in, origin);
  if (cp.model_hash != expected_hash)
    throw ConfigError(origin + ": checkpoint belongs to a different model");
  const auto n = get<std::int64_t>(in, origin);
  if (n != expected_dimension)
    throw ConfigError(origin + ": checkpoint dimension " + std::to_string(n) + ", model has " +
                      std::to_string(expected_dimension));
  cp.time = get<double>(in, origin);
  cp.covariance.resize(n, n);
  if (!in.read(reinterpret_cast<char*>(cp.covariance.data()),
               static_cast<std::streamsize>(sizeof(Complex) * cp.covariance.size())))
    throw ConfigError(origin + ": truncated checkpoint");
  if (!cp.covariance.allFinite()) throw ConfigError(origin + ": non-finite checkpoint data");
  return cp;
}

}  // namespace mesofcs
