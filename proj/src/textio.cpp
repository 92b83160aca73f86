#include "sparselab/textio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sparselab {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(matrix(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw std::runtime_error("read_matrix: bad header");
  Eigen::MatrixXd matrix(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(in >> matrix(i, j)))
        throw std::runtime_error("read_matrix: truncated matrix body");
  return matrix;
}

void save_matrix(const std::string& path, const Eigen::MatrixXd& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_matrix: cannot open " + path);
  write_matrix(out, matrix);
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_matrix: cannot open " + path);
  return read_matrix(in);
}

void save_dictionary(const std::string& path, const Dictionary& dict) {
  save_matrix(path, dict.entries);
}

Dictionary load_dictionary(const std::string& path) {
  Dictionary dict;
  dict.entries = load_matrix(path);
  dict.column_norms_unit = dict.columns_unit_to();
  return dict;
}

ContentHash& ContentHash::add_bytes(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= bytes[i];
    state_ *= 0x100000001B3ULL;
  }
  return *this;
}

ContentHash& ContentHash::add(const std::string& text) {
  return add_bytes(text.data(), text.size()).add_bytes("|", 1);
}

ContentHash& ContentHash::add(std::uint64_t value) {
  return add(std::to_string(value));
}

ContentHash& ContentHash::add(const Eigen::MatrixXd& matrix) {
  add(static_cast<std::uint64_t>(matrix.rows()));
  add(static_cast<std::uint64_t>(matrix.cols()));
  for (Index j = 0; j < matrix.cols(); ++j)
    for (Index i = 0; i < matrix.rows(); ++i) add(matrix(i, j));
  return *this;
}

ContentHash& ContentHash::add(const Eigen::VectorXd& vector) {
  add(static_cast<std::uint64_t>(vector.size()));
  for (Index i = 0; i < vector.size(); ++i) add(vector[i]);
  return *this;
}

std::string ContentHash::hex() const {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(state_));
  return buffer;
}

std::uint64_t hash_matrix(const Eigen::MatrixXd& matrix) {
  return ContentHash().add(matrix).value();
}

std::string hash_matrix_hex(const Eigen::MatrixXd& matrix) {
  return ContentHash().add(matrix).hex();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_file: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_file: cannot open " + path);
  out << contents;
}

}  // namespace sparselab
