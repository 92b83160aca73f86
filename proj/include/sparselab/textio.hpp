#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

#include "sparselab/types.hpp"

namespace sparselab {

/// Formats a double with 17 significant digits (round-trips exactly).
std::string format_double(double value);

/// Plain-text matrix exchange format: header line "rows cols", then one
/// line per row with space-separated values at 17 significant digits.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& matrix);
Eigen::MatrixXd read_matrix(std::istream& in);

void save_matrix(const std::string& path, const Eigen::MatrixXd& matrix);
Eigen::MatrixXd load_matrix(const std::string& path);

void save_dictionary(const std::string& path, const Dictionary& dict);
Dictionary load_dictionary(const std::string& path);

/// Streaming FNV-1a 64-bit content hash over canonical text serializations.
class ContentHash {
 public:
  ContentHash& add_bytes(const void* data, std::size_t size);
  ContentHash& add(const std::string& text);
  ContentHash& add(double value) { return add(format_double(value)); }
  ContentHash& add(std::uint64_t value);
  ContentHash& add(const Eigen::MatrixXd& matrix);
  ContentHash& add(const Eigen::VectorXd& vector);

  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

std::uint64_t hash_matrix(const Eigen::MatrixXd& matrix);
std::string hash_matrix_hex(const Eigen::MatrixXd& matrix);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace sparselab
