#include <doctest.h>

#include <filesystem>
#include <string>

#include "gcs/common/error.hpp"
#include "gcs/common/fileio.hpp"
#include "gcs/common/rng.hpp"
#include "gcs/io/archive.hpp"
#include "gcs/io/csv.hpp"

using namespace gcs;
namespace fs = std::filesystem;

namespace {

io::FieldArchive random_field(std::uint64_t seed) {
  Rng rng(seed, "field");
  io::FieldArchive a;
  a.kind = io::FieldKind::saturation;
  a.dims = {3, 4, 2};
  a.origin = {1, 0, 2};
  a.times_years = {2.0, 6.5, 10.0};
  for (std::size_t i = 0; i < a.times_years.size() * a.dims.count(); ++i) a.values.push_back(rng.uniform());
  return a;
}

fs::path scratch_dir(const char* name) {
  auto d = fs::temp_directory_path() / ("gcs_test_io_" + std::string(name));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string error_of(const std::string& bytes) {
  try {
    (void)io::deserialize_field(bytes);
  } catch (const IoError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("field archive round trip is bit-identical") {
  const auto a = random_field(3);
  const auto bytes = io::serialize_field(a);
  const auto b = io::deserialize_field(bytes);
  CHECK(b.kind == a.kind);
  CHECK(b.dims.nx == 3);
  CHECK(b.dims.nz == 2);
  CHECK(b.origin == a.origin);
  CHECK(b.times_years == a.times_years);
  CHECK(b.values == a.values);
  CHECK(io::serialize_field(b) == bytes);

  const auto dir = scratch_dir("field");
  io::write_field(dir / "f.gcsf", a);
  CHECK(read_file(dir / "f.gcsf") == bytes);
  CHECK(io::read_field(dir / "f.gcsf").values == a.values);
}

TEST_CASE("field archive errors are distinct") {
  const auto bytes = io::serialize_field(random_field(4));

  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  CHECK(error_of(flipped).find("checksum") != std::string::npos);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK(error_of(magic).find("magic") != std::string::npos);

  auto version = bytes;
  version[8] = static_cast<char>(io::kFieldArchiveVersion + 1);
  CHECK(error_of(version).find("version") != std::string::npos);

  CHECK(error_of(bytes.substr(0, bytes.size() - 20)).find("truncated") != std::string::npos);
  CHECK(error_of(bytes.substr(0, 10)).find("truncated") != std::string::npos);
  CHECK(error_of("").find("magic") != std::string::npos);

  CHECK_THROWS_AS(io::read_field(fs::temp_directory_path() / "gcs_no_such_file.gcsf"), IoError);
}

TEST_CASE("series, realization and matrix archives round trip") {
  const auto dir = scratch_dir("series");
  flowsim::FieldSeries s;
  s.dims = {2, 2, 3};
  s.origin = {4, 5, 1};
  s.times_years = {1.0, 2.0};
  Rng rng(9, "series");
  for (int i = 0; i < 24; ++i) {
    s.pressure.push_back(1.8e7 + 1e5 * rng.normal());
    s.saturation.push_back(rng.uniform());
  }
  io::write_series(dir / "run", s);
  CHECK(fs::exists(dir / "run_p.gcsf"));
  CHECK(fs::exists(dir / "run_S.gcsf"));
  const auto t = io::read_series(dir / "run");
  CHECK(t.pressure == s.pressure);
  CHECK(t.saturation == s.saturation);
  CHECK(t.origin == s.origin);
  // Swapped kinds are rejected.
  fs::copy_file(dir / "run_S.gcsf", dir / "bad_p.gcsf");
  fs::copy_file(dir / "run_p.gcsf", dir / "bad_S.gcsf");
  CHECK_THROWS_AS(io::read_series(dir / "bad"), IoError);

  geomodel::Realization r;
  for (int i = 0; i < 5; ++i) {
    r.kx.push_back(10.0 * (i + 1));
    r.kz.push_back(1.0 * (i + 1));
    r.phi.push_back(0.1 + 0.01 * i);
  }
  for (std::size_t i = 0; i < geomodel::kMetaCount; ++i) r.meta.values[i] = 0.5 * static_cast<double>(i);
  r.xi = {0.25, -1.5, 3.0};
  const auto rb = io::serialize_realization(r);
  const auto r2 = io::deserialize_realization(rb);
  CHECK(r2.kx == r.kx);
  CHECK(r2.kz == r.kz);
  CHECK(r2.phi == r.phi);
  CHECK(r2.meta.values == r.meta.values);
  CHECK(r2.xi == r.xi);
  auto rbad = rb;
  rbad[20] ^= 0x10;
  CHECK_THROWS_AS(io::deserialize_realization(rbad), IoError);

  io::MatrixArchive m{{"a", "b", "c"}, Eigen::MatrixXd::Random(4, 3)};
  const auto m2 = io::deserialize_matrix(io::serialize_matrix(m));
  CHECK(m2.columns == m.columns);
  CHECK(m2.values == m.values);
  io::MatrixArchive empty{{"x"}, Eigen::MatrixXd(0, 1)};
  CHECK(io::deserialize_matrix(io::serialize_matrix(empty)).values.rows() == 0);
  // A field archive is not a matrix archive.
  CHECK_THROWS_AS(io::deserialize_matrix(io::serialize_field(random_field(1))), IoError);
}

TEST_CASE("csv tables") {
  io::CsvTable t({"name", "n", "x"});
  t.row().cell("a").cell(3).cell(0.1);
  t.row().cell("b").cell(std::size_t{4}).cell(-2.5e-300);
  CHECK(t.str() == "name,n,x\na,3,0.10000000000000001\nb,4,-2.5e-300\n");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK_THROWS_AS(t.row().cell("has,comma"), ArgumentError);
  io::CsvTable u({"a", "b"});
  u.row().cell(1);
  CHECK_THROWS(u.str());
  CHECK_THROWS(u.row());
}
