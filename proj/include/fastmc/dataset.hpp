#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fastmc/error.hpp"

namespace fastmc {

/// Uniformly sampled record of an m-dimensional process; samples[j * m + i].
struct Dataset {
  std::size_t dim = 1;
  double interval = 1.0;  // h
  std::vector<double> samples;

  Dataset() = default;
  Dataset(std::size_t m, double h, std::vector<double> values) : dim(m), interval(h), samples(std::move(values)) {
    validate();
  }

  std::size_t size() const { return dim == 0 ? 0 : samples.size() / dim; }
  std::span<const double> at(std::size_t j) const { return std::span<const double>(samples).subspan(j * dim, dim); }

  void validate() const {
    if (dim < 1) throw InputError("dataset: dimension must be >= 1");
    if (!(interval > 0.0) || !std::isfinite(interval)) throw InputError("dataset: sampling interval must be positive");
    if (samples.size() % dim != 0) throw InputError("dataset: sample count is not a multiple of the dimension");
    if (size() < 2) throw InputError("dataset: at least two observations are required");
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (!std::isfinite(samples[k])) {
        throw InputError("dataset: non-finite value at observation " + std::to_string(k / dim));
      }
    }
  }
};

}  // namespace fastmc
