#pragma once

// Experiment configuration: flat `key = value` text with dotted sections.
// See docs/config.md for the key reference.

#include <cstdint>
#include <string>
#include <vector>

#include "wkam/hj_solver.hpp"
#include "wkam/model.hpp"

namespace wkam {

enum class StudyKind { solve, flow, alpha, measure, rate_c1, rate_c2, selection, barrier };

const char* to_string(StudyKind k);
StudyKind study_kind_from_string(const std::string& s);

/// One term amplitude * sin/cos(2 pi k.x) of the quadraticKam solution.
struct TermSpec {
  double amplitude = 0.0;
  std::vector<int> wave;
  bool is_sine = true;

  bool operator==(const TermSpec&) const = default;
};

struct ModelSpec {
  std::string preset;  // non-empty: a named preset, the fields below are ignored
  ModelKind kind = ModelKind::mechanical1d;
  // mechanical1d potential
  double a0 = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
  // quadraticKam
  std::vector<double> omega;
  std::vector<TermSpec> u;

  bool operator==(const ModelSpec&) const = default;
};

struct ExperimentConfig {
  StudyKind study = StudyKind::solve;
  ModelSpec model;
  std::vector<std::vector<double>> c{{0.0}};
  std::vector<double> eps_list{0.02};
  std::vector<int> grid_n{1024};  // one entry for all eps, or one per eps
  SolverConfig solver;

  // trajectory and measure parameters
  int seeds = 50;
  double T = 20.0;
  double ds = 1e-3;
  int resync = 10;
  double window = 0.2;           // trailing fraction used for alpha limits
  double cluster_radius = 1e-3;  // alpha-limit clustering radius
  std::vector<double> x0{0.3};
  std::vector<double> p0;        // empty: taken from the field or the separatrix
  double tau = 1.0;
  double delta = 0.02;
  std::vector<double> delta_list{1e-1, 1e-2, 1e-3};
  double delta_exponent = 0.9;   // delta(eps) = eps^nu in reports

  // Diophantine check
  double eta = 1.0;
  int z_max = 200;

  std::uint64_t rng_seed = 0;
  std::string out_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the text form. Unknown keys, malformed values and failed
/// validation raise ConfigError naming the line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form: every key, fixed order, reals with %.17g.
std::string serialize_config(const ExperimentConfig& cfg);

/// Throws ConfigError when invariants fail: eps strictly decreasing and
/// positive, grid sizes powers of two, c vectors of the model dimension,
/// study prerequisites on the model kind.
void validate_config(const ExperimentConfig& cfg);

/// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

int model_dim(const ModelSpec& spec);

/// The model at a given c; quadraticKam models are built around c so that
/// h(c) = 0 and the exact solution is u.
TonelliModel build_model(const ModelSpec& spec, const RealVec& c);

RealVec to_realvec(const std::vector<double>& v);

/// Grid size used for the i-th eps.
int grid_size_for(const ExperimentConfig& cfg, std::size_t eps_index);

}  // namespace wkam
