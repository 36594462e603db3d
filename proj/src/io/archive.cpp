#include "gcs/io/archive.hpp"

#include <bit>
#include <cstring>

#include "gcs/common/error.hpp"
#include "gcs/common/fileio.hpp"
#include "gcs/common/hash.hpp"

namespace gcs::io {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

namespace {

constexpr char kFieldMagic[8] = {'G', 'C', 'S', 'F', 'I', 'E', 'L', 'D'};
constexpr char kRealMagic[8] = {'G', 'C', 'S', 'R', 'E', 'A', 'L', '\0'};
constexpr char kMatrixMagic[8] = {'G', 'C', 'S', 'M', 'A', 'T', 'R', 'X'};

class Writer {
 public:
  Writer(const char (&magic)[8], std::uint32_t version) : out_(magic, 8) { put(version); }

  template <class T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_doubles(const std::vector<double>& v) {
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  std::string finish() {
    put<std::uint64_t>(fnv1a(std::string_view(out_)));
    return std::move(out_);
  }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const char (&magic)[8], std::uint32_t version, const char* what)
      : in_(bytes), what_(what) {
    if (in_.size() < 8 || std::memcmp(in_.data(), magic, 8) != 0) throw IoError(std::string(what_) + ": bad magic");
    pos_ = 8;
    const auto v = take<std::uint32_t>();
    if (v != version) {
      throw IoError(std::string(what_) + ": unsupported version " + std::to_string(v) + " (expected " +
                    std::to_string(version) + ")");
    }
    if (in_.size() < pos_ + sizeof(std::uint64_t)) throw IoError(std::string(what_) + ": truncated");
    end_ = in_.size() - sizeof(std::uint64_t);
  }

  template <class T>
  T take() {
    if (pos_ + sizeof(T) > in_.size()) throw IoError(std::string(what_) + ": truncated");
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::vector<double> take_doubles(std::size_t n) {
    if (n > (end_ - std::min(pos_, end_)) / sizeof(double)) throw IoError(std::string(what_) + ": truncated");
    std::vector<double> v(n);
    std::memcpy(v.data(), in_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  std::string take_string() {
    const auto n = take<std::uint32_t>();
    if (pos_ + n > end_) throw IoError(std::string(what_) + ": truncated");
    std::string s(in_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  // Size checks come before the checksum so a short file reports truncation rather than corruption.
  void finish() {
    if (pos_ > end_) throw IoError(std::string(what_) + ": truncated");
    if (pos_ < end_) throw IoError(std::string(what_) + ": trailing bytes after payload");
    std::uint64_t stored;
    std::memcpy(&stored, in_.data() + end_, sizeof(stored));
    if (stored != fnv1a(std::string_view(in_.data(), end_))) throw IoError(std::string(what_) + ": checksum mismatch");
  }

 private:
  const std::string& in_;
  const char* what_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

void check_dims(const flowsim::GridDims& d) {
  if (d.nx < 1 || d.ny < 1 || d.nz < 1) throw ArgumentError("archive grid dimensions must be positive");
}

}  // namespace

void FieldArchive::validate() const {
  check_dims(dims);
  if (kind != FieldKind::pressure && kind != FieldKind::saturation) throw ArgumentError("unknown field kind");
  if (values.size() != times_years.size() * dims.count()) {
    throw ShapeError("field archive payload does not match times x cells");
  }
}

std::string serialize_field(const FieldArchive& a) {
  a.validate();
  Writer w(kFieldMagic, kFieldArchiveVersion);
  w.put<char>(static_cast<char>(a.kind));
  w.put<std::int32_t>(a.dims.nx);
  w.put<std::int32_t>(a.dims.ny);
  w.put<std::int32_t>(a.dims.nz);
  for (int o : a.origin) w.put<std::int32_t>(o);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(a.times_years.size()));
  w.put_doubles(a.times_years);
  w.put_doubles(a.values);
  return w.finish();
}

FieldArchive deserialize_field(const std::string& bytes) {
  Reader r(bytes, kFieldMagic, kFieldArchiveVersion, "field archive");
  FieldArchive a;
  const char kind = r.take<char>();
  if (kind != 'p' && kind != 'S') throw IoError("field archive: unknown kind");
  a.kind = static_cast<FieldKind>(kind);
  a.dims.nx = r.take<std::int32_t>();
  a.dims.ny = r.take<std::int32_t>();
  a.dims.nz = r.take<std::int32_t>();
  if (a.dims.nx < 1 || a.dims.ny < 1 || a.dims.nz < 1) throw IoError("field archive: invalid grid dimensions");
  for (int& o : a.origin) o = r.take<std::int32_t>();
  const auto nt = r.take<std::uint32_t>();
  a.times_years = r.take_doubles(nt);
  a.values = r.take_doubles(static_cast<std::size_t>(nt) * a.dims.count());
  r.finish();
  return a;
}

void write_field(const std::filesystem::path& path, const FieldArchive& a) { atomic_write_file(path, serialize_field(a)); }
FieldArchive read_field(const std::filesystem::path& path) { return deserialize_field(read_file(path)); }

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  auto p = stem;
  p += suffix;
  return p;
}

}  // namespace

void write_series(const std::filesystem::path& stem, const flowsim::FieldSeries& s) {
  s.validate();
  write_field(with_suffix(stem, "_p.gcsf"), {FieldKind::pressure, s.dims, s.origin, s.times_years, s.pressure});
  write_field(with_suffix(stem, "_S.gcsf"), {FieldKind::saturation, s.dims, s.origin, s.times_years, s.saturation});
}

flowsim::FieldSeries read_series(const std::filesystem::path& stem) {
  auto p = read_field(with_suffix(stem, "_p.gcsf"));
  auto s = read_field(with_suffix(stem, "_S.gcsf"));
  if (p.kind != FieldKind::pressure || s.kind != FieldKind::saturation) throw IoError("series archives hold the wrong kinds");
  if (!(p.dims == s.dims) || p.origin != s.origin || p.times_years != s.times_years) {
    throw IoError("pressure and saturation archives of " + stem.string() + " disagree in grid or times");
  }
  flowsim::FieldSeries out;
  out.dims = p.dims;
  out.origin = p.origin;
  out.times_years = std::move(p.times_years);
  out.pressure = std::move(p.values);
  out.saturation = std::move(s.values);
  return out;
}

std::string serialize_realization(const geomodel::Realization& r) {
  const auto n = r.cell_count();
  if (r.kz.size() != n || r.phi.size() != n) throw ShapeError("realization property fields differ in length");
  Writer w(kRealMagic, kRealizationArchiveVersion);
  w.put<std::uint64_t>(n);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(r.xi.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(geomodel::kMetaCount));
  for (double v : r.meta.values) w.put<double>(v);
  w.put_doubles(r.xi);
  w.put_doubles(r.kx);
  w.put_doubles(r.kz);
  w.put_doubles(r.phi);
  return w.finish();
}

geomodel::Realization deserialize_realization(const std::string& bytes) {
  Reader rd(bytes, kRealMagic, kRealizationArchiveVersion, "realization archive");
  geomodel::Realization r;
  const auto n = rd.take<std::uint64_t>();
  const auto nxi = rd.take<std::uint32_t>();
  if (rd.take<std::uint32_t>() != geomodel::kMetaCount) throw IoError("realization archive: metaparameter count");
  for (double& v : r.meta.values) v = rd.take<double>();
  r.xi = rd.take_doubles(nxi);
  r.kx = rd.take_doubles(n);
  r.kz = rd.take_doubles(n);
  r.phi = rd.take_doubles(n);
  rd.finish();
  return r;
}

void write_realization(const std::filesystem::path& path, const geomodel::Realization& r) {
  atomic_write_file(path, serialize_realization(r));
}
geomodel::Realization read_realization(const std::filesystem::path& path) {
  return deserialize_realization(read_file(path));
}

std::string serialize_matrix(const MatrixArchive& m) {
  if (static_cast<Eigen::Index>(m.columns.size()) != m.values.cols()) throw ShapeError("matrix column names do not match");
  Writer w(kMatrixMagic, kMatrixArchiveVersion);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.values.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.values.cols()));
  for (const auto& c : m.columns) w.put_string(c);
  std::vector<double> row_major(m.values.size());
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) row_major[i * m.values.cols() + j] = m.values(i, j);
  w.put_doubles(row_major);
  return w.finish();
}

MatrixArchive deserialize_matrix(const std::string& bytes) {
  Reader rd(bytes, kMatrixMagic, kMatrixArchiveVersion, "matrix archive");
  MatrixArchive m;
  const auto rows = rd.take<std::uint64_t>();
  const auto cols = rd.take<std::uint64_t>();
  for (std::uint64_t j = 0; j < cols; ++j) m.columns.push_back(rd.take_string());
  const auto flat = rd.take_doubles(rows * cols);
  rd.finish();
  m.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) m.values(i, j) = flat[i * cols + j];
  return m;
}

void write_matrix(const std::filesystem::path& path, const MatrixArchive& m) { atomic_write_file(path, serialize_matrix(m)); }
MatrixArchive read_matrix(const std::filesystem::path& path) { return deserialize_matrix(read_file(path)); }

}  // namespace gcs::io
