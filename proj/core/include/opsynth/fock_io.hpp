#pragma once

// Text forms for matrices on a truncated Fock space.
//
//   JSON: {"cutoff": D, "re": [[...], ...], "im": [[...], ...]}   (row m, column n)
//   CSV : header "m,n,re,im", one row per entry, row-major
//
// Both forms carry full double precision, so write/read is lossless.

#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "opsynth/fock.hpp"

namespace opsynth {

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& entries);
Eigen::MatrixXcd matrix_from_json(const nlohmann::json& doc);

std::string matrix_to_csv(const Eigen::MatrixXcd& entries);
Eigen::MatrixXcd matrix_from_csv(const std::string& text);

inline nlohmann::json to_json(const DensityMatrix& rho) { return matrix_to_json(rho.entries()); }
DensityMatrix density_from_json(const nlohmann::json& doc, double truncation_tail = 0.0);

/// Reads a matrix from disk, choosing the format by extension (.json or .csv).
Eigen::MatrixXcd read_matrix_file(const std::string& path);

/// Writes `contents` to `path` through a temporary file and rename.
void write_file_atomically(const std::string& path, const std::string& contents);

}  // namespace opsynth
