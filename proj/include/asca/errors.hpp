#pragma once

#include <stdexcept>
#include <string>

namespace asca {

// Segmentation could not find the expected number of energy peaks.
class SegmentationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required per-key recording file is absent.
class MissingKeyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The sentence corpus cannot satisfy the requested stratum sizes.
class InsufficientCorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A character outside the 37-symbol alphabet was encountered.
class AlphabetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Calibration bracket precondition failed.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// LoRA training loss became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RateLimited : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asca
