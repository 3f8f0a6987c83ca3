#include "tylercov/sampling.hpp"

#include <cmath>
#include <sstream>

namespace tylercov {

std::string to_string(SampleModel model) {
  switch (model) {
    case SampleModel::acg:
      return "acg";
    case SampleModel::compound_gaussian:
      return "compound-gaussian";
    case SampleModel::external:
      return "external";
  }
  return "unknown";
}

SampleModel parse_sample_model(const std::string& name) {
  if (name == "acg") return SampleModel::acg;
  if (name == "compound-gaussian") return SampleModel::compound_gaussian;
  if (name == "external") return SampleModel::external;
  throw InvalidInput("unknown sample model: " + name);
}

TextureSampler constant_texture(double value) {
  if (!(value > 0.0)) {
    throw InvalidInput("constant texture must be positive");
  }
  return [value](double, double) { return value; };
}

TextureSampler inverse_chi_square_texture(int dof) {
  if (dof == 1) {
    return [](double u1, double u2) {
      const double z = rng::normal_from_uniforms(u1, u2);
      return 1.0 / (z * z);
    };
  }
  if (dof == 2) {
    return [](double u1, double) { return 1.0 / (-2.0 * std::log(u1)); };
  }
  throw InvalidInput("inverse chi-square texture supports dof 1 or 2");
}

TextureSampler parse_texture(const std::string& name) {
  if (name == "constant") return constant_texture();
  if (name == "inv-chisq:1") return inverse_chi_square_texture(1);
  if (name == "inv-chisq:2") return inverse_chi_square_texture(2);
  throw InvalidInput("unknown texture: " + name);
}

namespace {

// Fills row i with sqrt(scale_i) * L z_i; no normalization.
Eigen::MatrixXd draw_raw(const ShapeMatrix& shape, const TextureSampler* texture,
                         long n, const SeededStream& stream) {
  if (n < 1) throw InvalidInput("sample count must be at least 1");
  const int p = shape.dim();
  if (p < 1) throw InvalidInput("shape matrix is empty");
  const Eigen::MatrixXd& L = shape.sqrt_factor();

  Eigen::MatrixXd raw(n, p);
  Eigen::VectorXd z(p);
  for (long i = 0; i < n; ++i) {
    double scale = 1.0;
    if (texture != nullptr) {
      const double u1 = rng::uniform(stream, i, rng::texture_slot0);
      const double u2 = rng::uniform(stream, i, rng::texture_slot1);
      const double tau = (*texture)(u1, u2);
      if (!(tau > 0.0) || !std::isfinite(tau)) {
        std::ostringstream os;
        os << "texture draw " << tau << " at sample " << i
           << " is not strictly positive";
        throw NonPositiveTexture(os.str());
      }
      scale = std::sqrt(tau);
    }
    for (int j = 0; j < p; ++j) z(j) = rng::normal(stream, i, j);
    raw.row(i) = scale * (L * z).transpose();
  }
  return raw;
}

SampleSet normalize_with_provenance(const Eigen::MatrixXd& raw,
                                    SampleModel provenance) {
  SampleSet out = normalize_rows(raw);
  out.provenance = provenance;
  return out;
}

}  // namespace

SampleSet sample_acg(const ShapeMatrix& shape, long n,
                     const SeededStream& stream) {
  return normalize_with_provenance(draw_raw(shape, nullptr, n, stream),
                                   SampleModel::acg);
}

SampleSet sample_compound_gaussian(const ShapeMatrix& shape,
                                   const TextureSampler& texture, long n,
                                   const SeededStream& stream) {
  return normalize_with_provenance(draw_raw(shape, &texture, n, stream),
                                   SampleModel::compound_gaussian);
}

RawDraw sample_acg_raw(const ShapeMatrix& shape, long n,
                       const SeededStream& stream) {
  RawDraw d;
  d.raw = draw_raw(shape, nullptr, n, stream);
  d.normalized = normalize_with_provenance(d.raw, SampleModel::acg);
  return d;
}

RawDraw sample_compound_gaussian_raw(const ShapeMatrix& shape,
                                     const TextureSampler& texture, long n,
                                     const SeededStream& stream) {
  RawDraw d;
  d.raw = draw_raw(shape, &texture, n, stream);
  d.normalized =
      normalize_with_provenance(d.raw, SampleModel::compound_gaussian);
  return d;
}

SampleSet normalize_rows(const Eigen::MatrixXd& raw) {
  if (raw.rows() < 1 || raw.cols() < 1) {
    throw InvalidInput("sample matrix must be nonempty");
  }
  SampleSet out;
  out.rows.resize(raw.rows(), raw.cols());
  for (long i = 0; i < raw.rows(); ++i) {
    const double norm = raw.row(i).norm();
    if (!(norm > 1e-300) || !std::isfinite(norm)) {
      std::ostringstream os;
      os << "row " << i << " has norm " << norm;
      throw ZeroSample(i, os.str());
    }
    out.rows.row(i) = raw.row(i) / norm;
  }
  out.provenance = SampleModel::external;
  return out;
}

}  // namespace tylercov
