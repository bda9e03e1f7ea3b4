#include "wkam/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace wkam {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TextFile::TextFile(const std::string& path) : path_(path) {}

TextFile::~TextFile() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

TextFile& TextFile::operator<<(const std::string& s) {
  buffer_ += s;
  return *this;
}

void TextFile::close() {
  closed_ = true;
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path_ + " for writing");
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out) throw IoError("write failed: " + path_);
}

void write_field_csv(const std::string& path, const ScalarField& field, const MomentumField& mfield) {
  const PeriodicGrid& g = field.grid();
  if (!(g == mfield.grid)) throw DomainError("write_field_csv: grids differ");
  const int n = g.dim();
  TextFile f(path);
  f << (n == 1 ? "i0,x0,value,p0,shock\n" : "i0,i1,x0,x1,value,p0,p1,shock\n");
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto ij = g.unflat(k);
    const RealVec x = g.node(k);
    for (int a = 0; a < n; ++a) f << ij[a] << ",";
    for (int a = 0; a < n; ++a) f << x[a] << ",";
    f << field[k] << ",";
    for (int a = 0; a < n; ++a) f << mfield.momentum[k][a] << ",";
    f << (mfield.is_shock(k) ? "1\n" : "0\n");
  }
  f.close();
}

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > in.size()) throw IoError("truncated field dump: " + path);
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

constexpr char kMagic[5] = {'W', 'K', 'A', 'M', '1'};

}  // namespace

void write_field_binary(const std::string& path, const ScalarField& field) {
  const PeriodicGrid& g = field.grid();
  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.count(a)));
  put_le<double>(out, field.meta.eps);
  for (int a = 0; a < g.dim(); ++a)
    put_le<double>(out, a < field.meta.c.size() ? field.meta.c[a] : 0.0);
  put_le<double>(out, field.meta.h);
  for (double v : field.values()) put_le<double>(out, v);
  TextFile f(path);
  f << out;
  f.close();
}

ScalarField read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0)
    throw IoError("not a WKAM1 field dump: " + path);
  std::size_t pos = sizeof kMagic;
  const auto n = get_le<std::uint32_t>(data, pos, path);
  if (n < 1 || n > kMaxDim) throw IoError("bad dimension in " + path);
  std::array<int, kMaxDim> counts{1, 1};
  for (std::uint32_t a = 0; a < n; ++a) counts[a] = static_cast<int>(get_le<std::uint32_t>(data, pos, path));
  PeriodicGrid g(static_cast<int>(n), counts);
  FieldMeta meta;
  meta.eps = get_le<double>(data, pos, path);
  meta.c = RealVec(static_cast<int>(n));
  for (std::uint32_t a = 0; a < n; ++a) meta.c[static_cast<int>(a)] = get_le<double>(data, pos, path);
  meta.h = get_le<double>(data, pos, path);
  std::vector<double> values(g.size());
  for (double& v : values) v = get_le<double>(data, pos, path);
  if (pos != data.size()) throw IoError("trailing bytes in " + path);
  ScalarField f(g, std::move(values));
  f.meta = meta;
  return f;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, const TonelliModel& model) {
  if (model.dim() != 1) throw DomainError("write_trajectory_csv: one-dimensional trajectories only");
  TextFile f(path);
  f << "s,x,x_mod1,p,H\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double x = traj.x[i][0], p = traj.p[i][0];
    f << traj.s[i] << "," << x << "," << wrap01(x) << "," << p << "," << model.H(traj.x[i], traj.p[i])
      << "\n";
  }
  f.close();
}

void write_alpha_csv(const std::string& path, const std::vector<AlphaRow>& rows) {
  TextFile f(path);
  f << "seed_x0,cluster_x,cluster_p,revisits,radius\n";
  for (const auto& r : rows)
    f << r.seed << "," << r.x << "," << r.p << "," << r.revisits << "," << r.radius << "\n";
  f.close();
}

}  // namespace wkam
