#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

#include "tylercov/rng.hpp"
#include "tylercov/shape_matrix.hpp"

namespace tylercov {

enum class SampleModel { acg, compound_gaussian, external };

std::string to_string(SampleModel model);
SampleModel parse_sample_model(const std::string& name);

// n unit-norm rows of dimension p, one sample per row.
struct SampleSet {
  Eigen::MatrixXd rows;
  SampleModel provenance = SampleModel::external;

  long n() const { return rows.rows(); }
  int p() const { return static_cast<int>(rows.cols()); }
};

// Maps two independent U(0,1) draws to a strictly positive scale factor.
using TextureSampler = std::function<double(double, double)>;

TextureSampler constant_texture(double value = 1.0);

// tau = 1 / chi^2_k for k in {1, 2}. Heavy-tailed: E[tau] is infinite.
TextureSampler inverse_chi_square_texture(int dof);

TextureSampler parse_texture(const std::string& name);

// Draws n i.i.d. ACG(shape) samples: sqrt(shape) z / ||sqrt(shape) z|| with
// z standard normal. Deterministic in (stream, sample index).
SampleSet sample_acg(const ShapeMatrix& shape, long n,
                     const SeededStream& stream);

// Compound-Gaussian draw sqrt(tau_i) sqrt(shape) z_i, normalized to the unit
// sphere. The texture consumes its own reserved slots (before the Gaussian
// components), so the Gaussian draws match sample_acg's for the same stream.
SampleSet sample_compound_gaussian(const ShapeMatrix& shape,
                                   const TextureSampler& texture, long n,
                                   const SeededStream& stream);

// Raw (pre-normalization) rows together with the normalized sample set; the
// SCM baseline consumes the raw rows.
struct RawDraw {
  Eigen::MatrixXd raw;
  SampleSet normalized;
};

RawDraw sample_acg_raw(const ShapeMatrix& shape, long n,
                       const SeededStream& stream);
RawDraw sample_compound_gaussian_raw(const ShapeMatrix& shape,
                                     const TextureSampler& texture, long n,
                                     const SeededStream& stream);

// Divides every row by its Euclidean norm; provenance is marked external.
// Throws ZeroSample (with the row index) when a row's norm is below 1e-300.
SampleSet normalize_rows(const Eigen::MatrixXd& raw);

}  // namespace tylercov
