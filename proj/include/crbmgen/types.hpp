#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace crbmgen {

/// Row-major dense matrix. Rolls are time-major (row = time step), so a
/// run of consecutive rows is one contiguous block of memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not fit together (stride vs. length, template vs. roll, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary file (bad magic, truncation, invalid header).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Malformed Standard MIDI File.
class MidiParseError : public Error {
 public:
  using Error::Error;
};

/// Ingestion produced no notes.
class EmptyPieceError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace crbmgen
