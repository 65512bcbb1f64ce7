#pragma once

#include <stdexcept>
#include <string>

namespace lmk {

// Base for all data/validation failures. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file content: bad magic, bad version, unparsable field.
class FormatError : public Error {
 public:
  using Error::Error;
};

// File length disagrees with the size announced in its header.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
};

// Sidecar id count differs from the row count in the matrix header.
class CountMismatchError : public Error {
 public:
  using Error::Error;
};

class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

class EmptyCatalogError : public Error {
 public:
  using Error::Error;
};

// Fusion members whose id lists differ in content or order.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

class DimError : public Error {
 public:
  using Error::Error;
};

class EmptyGalleryError : public Error {
 public:
  using Error::Error;
};

class MissingLabelError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// More than three prediction rows for one image id.
class CardinalityError : public Error {
 public:
  using Error::Error;
};

class MissingPredictionError : public Error {
 public:
  using Error::Error;
};

// Train label absent from the class catalog.
class CatalogError : public Error {
 public:
  using Error::Error;
};

class NonLandmarkSetError : public Error {
 public:
  using Error::Error;
};

class DuplicateInListError : public Error {
 public:
  using Error::Error;
};

class UnknownQueryError : public Error {
 public:
  using Error::Error;
};

class GridTooLargeError : public Error {
 public:
  using Error::Error;
};

// Bad config file: syntax, unknown key, out-of-range value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmk
