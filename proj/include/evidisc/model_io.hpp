#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "evidisc/predictor.hpp"

namespace evidisc {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& tok, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("model file: bad number '" + tok + "' in " + context);
  }
}

}  // namespace detail

/// Self-describing flat key-value model file. Layout:
///   evidisc-model 1
///   variant A|B
///   dim D
///   classes C
///   class_names name1 ... nameC
///   then per class: class z / n / prior / seed_scale / dof / mean_precision /
///   mean (d values) / cov_eigenvalues (d values) / cov_eigenvector i (d values,
///   the i-th eigenbasis column). Doubles are %.17g and round-trip exactly.
inline void save_model(const FittedModel& model, std::ostream& os) {
  os << "evidisc-model 1\n";
  os << "variant " << variant_name(model.variant) << "\n";
  os << "dim " << model.dim << "\n";
  os << "classes " << model.num_classes << "\n";
  os << "class_names";
  for (const std::string& name : model.class_names) os << ' ' << name;
  os << "\n";
  for (int z = 0; z < model.num_classes; ++z) {
    const ClassSufficientStats& s = model.stats[z];
    const ClassHyperParams& hp = model.params.per_class[z];
    os << "class " << (z + 1) << "\n";
    os << "n " << s.count << "\n";
    os << "prior " << detail::format_double(model.params.class_prior[z]) << "\n";
    os << "seed_scale " << detail::format_double(hp.seed_scale) << "\n";
    os << "dof " << detail::format_double(hp.dof) << "\n";
    os << "mean_precision " << detail::format_double(hp.mean_precision) << "\n";
    os << "mean";
    for (double v : s.mean) os << ' ' << detail::format_double(v);
    os << "\n";
    os << "cov_eigenvalues";
    for (double v : s.eigen.eigenvalues) os << ' ' << detail::format_double(v);
    os << "\n";
    for (int i = 0; i < model.dim; ++i) {
      os << "cov_eigenvector " << i;
      for (int j = 0; j < model.dim; ++j)
        os << ' ' << detail::format_double(s.eigen.eigenvectors(j, i));
      os << "\n";
    }
  }
}

inline void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  save_model(model, os);
  if (!os) throw std::runtime_error("save_model: write failed for " + path);
}

inline FittedModel load_model(std::istream& is) {
  const auto expect = [&is](const std::string& key) {
    std::string tok;
    if (!(is >> tok) || tok != key)
      throw std::runtime_error("model file: expected '" + key + "', got '" + tok + "'");
  };
  expect("evidisc-model");
  int version = 0;
  is >> version;
  if (version != 1) throw std::runtime_error("model file: unsupported version");
  expect("variant");
  std::string vtok;
  is >> vtok;
  const Variant variant = variant_from_string(vtok);
  expect("dim");
  int dim = 0;
  is >> dim;
  expect("classes");
  int num_classes = 0;
  is >> num_classes;
  if (dim < 1 || num_classes < 1) throw std::runtime_error("model file: bad dimensions");
  expect("class_names");
  std::vector<std::string> names(num_classes);
  for (std::string& name : names) is >> name;

  std::vector<ClassSufficientStats> stats;
  HyperParams params;
  params.variant = variant;
  std::string tok;
  for (int z = 0; z < num_classes; ++z) {
    expect("class");
    int idx = 0;
    is >> idx;
    if (idx != z + 1) throw std::runtime_error("model file: classes out of order");
    ClassSufficientStats s;
    ClassHyperParams hp;
    double prior = 0.0;
    expect("n");
    is >> s.count;
    expect("prior");
    is >> tok;
    prior = detail::parse_double(tok, "prior");
    expect("seed_scale");
    is >> tok;
    hp.seed_scale = detail::parse_double(tok, "seed_scale");
    expect("dof");
    is >> tok;
    hp.dof = detail::parse_double(tok, "dof");
    expect("mean_precision");
    is >> tok;
    hp.mean_precision = detail::parse_double(tok, "mean_precision");
    expect("mean");
    s.mean.resize(dim);
    for (double& v : s.mean) {
      is >> tok;
      v = detail::parse_double(tok, "mean");
    }
    expect("cov_eigenvalues");
    s.eigen.eigenvalues.resize(dim);
    for (double& v : s.eigen.eigenvalues) {
      is >> tok;
      v = detail::parse_double(tok, "cov_eigenvalues");
    }
    s.eigen.eigenvectors = Matrix(dim, dim);
    for (int i = 0; i < dim; ++i) {
      expect("cov_eigenvector");
      int col = -1;
      is >> col;
      if (col != i) throw std::runtime_error("model file: eigenvector rows out of order");
      for (int j = 0; j < dim; ++j) {
        is >> tok;
        s.eigen.eigenvectors(j, i) = detail::parse_double(tok, "cov_eigenvector");
      }
    }
    if (!is) throw std::runtime_error("model file: truncated");
    // cov = V diag(λ) Vᵀ, rebuilt from the stored eigensystem
    s.cov = Matrix(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const double lam = s.eigen.eigenvalues[i];
      if (lam == 0.0) continue;
      for (int a = 0; a < dim; ++a) {
        const double va = s.eigen.eigenvectors(a, i) * lam;
        for (int b = 0; b < dim; ++b) s.cov(a, b) += va * s.eigen.eigenvectors(b, i);
      }
    }
    stats.push_back(std::move(s));
    params.per_class.push_back(hp);
    params.class_prior.push_back(prior);
  }
  return assemble_model(stats, params, names);
}

inline FittedModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  return load_model(static_cast<std::istream&>(is));
}

}  // namespace evidisc
