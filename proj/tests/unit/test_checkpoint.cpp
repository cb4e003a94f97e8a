#include <doctest.h>

#include <filesystem>

#include "mesofcs/checkpoint.hpp"

using namespace mesofcs;

TEST_CASE("checkpoint round trip") {
  const auto path = std::filesystem::temp_directory_path() / "mesofcs_unit.ckpt";
  Checkpoint out{0x1234abcdULL, 12.5, CMatrix::Random(5, 5)};
  write_checkpoint(path, out);
  const Checkpoint in = read_checkpoint(path, 0x1234abcdULL, 5);
  CHECK(in.time == 12.5);
  CHECK(in.covariance == out.covariance);
  CHECK_THROWS_AS(read_checkpoint(path, 0x1234abceULL, 5), ConfigError);
  CHECK_THROWS_AS(read_checkpoint(path, 0x1234abcdULL, 6), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_checkpoint(path, 0x1234abcdULL, 5), ConfigError);
}
