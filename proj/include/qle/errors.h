#pragma once

#include <stdexcept>
#include <string>

namespace qle {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad generator parameters or an infeasible request.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// API misuse: dead qubits, overlapping registers, bad ports.
class UsageError : public Error {
 public:
  using Error::Error;
};

// An ancilla that should be |0> is not.
class GarbageLeakError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class MergeError : public Error {
 public:
  using Error::Error;
};

// Non-integer party count out of view counting.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

// A protocol reached a state its invariants rule out.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Brute-force oracle asked for something too large.
class OracleRefusal : public Error {
 public:
  using Error::Error;
};

}  // namespace qle
