#pragma once

// File formats: field CSV and the WKAM1 binary dump, trajectory, alpha-limit
// and measure CSVs. Reals are written with %.17g so files round-trip and are
// byte-identical across runs.

#include <string>
#include <vector>

#include "wkam/characteristics.hpp"
#include "wkam/hj_solver.hpp"

namespace wkam {

std::string format_real(double v);

/// Columns i0[,i1], x0[,x1], value, p0[,p1], shock.
void write_field_csv(const std::string& path, const ScalarField& field, const MomentumField& mfield);

/// "WKAM1", then little-endian u32 n, u32 N_k (n of them), f64 eps,
/// f64 c_k (n of them), f64 h, f64 values in row-major order.
void write_field_binary(const std::string& path, const ScalarField& field);
ScalarField read_field_binary(const std::string& path);

/// Columns s, x (lifted), x_mod1, p, H; one-dimensional trajectories only.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, const TonelliModel& model);

struct AlphaRow {
  double seed = 0.0;
  double x = 0.0;
  double p = 0.0;
  int revisits = 0;
  double radius = 0.0;
};

void write_alpha_csv(const std::string& path, const std::vector<AlphaRow>& rows);

/// Thin checked wrapper over an output file stream.
class TextFile {
 public:
  explicit TextFile(const std::string& path);
  ~TextFile();
  TextFile(const TextFile&) = delete;
  TextFile& operator=(const TextFile&) = delete;

  TextFile& operator<<(const std::string& s);
  TextFile& operator<<(const char* s) { return *this << std::string(s); }
  TextFile& operator<<(double v) { return *this << format_real(v); }
  TextFile& operator<<(int v) { return *this << std::to_string(v); }
  TextFile& operator<<(long long v) { return *this << std::to_string(v); }
  TextFile& operator<<(std::size_t v) { return *this << std::to_string(v); }
  void close();

 private:
  std::string path_;
  std::string buffer_;
  bool closed_ = false;
};

}  // namespace wkam
