// include/cswitch/error.hpp

// Copyright 2026  The cswitch Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cswitch {

/// Base for every error caused by bad input data (files, manifests, queries).
/// The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad invocation: missing seed, inconsistent flags. CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : DataError("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public ParseError {
 public:
  DuplicateId(std::size_t line, const std::string& id)
      : ParseError(line, "duplicate utterance id '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class UnknownLang : public ParseError {
 public:
  UnknownLang(std::size_t line, const std::string& code)
      : ParseError(line, "unknown language code '" + code + "'"), code_(code) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class UnresolvedId : public DataError {
 public:
  explicit UnresolvedId(const std::string& id)
      : DataError("utterance id '" + id + "' does not resolve in the corpus") {}
};

class CrossCorpus : public DataError {
 public:
  CrossCorpus(const std::string& a, const std::string& b)
      : DataError("manifests reference different corpora: '" + a + "' vs '" + b + "'") {}
};

class OOVInTraining : public DataError {
 public:
  explicit OOVInTraining(const std::string& w)
      : DataError("training token '" + w + "' is outside the vocabulary") {}
};

class OOVQuery : public DataError {
 public:
  explicit OOVQuery(const std::string& w)
      : DataError("query word '" + w + "' is outside the closed vocabulary") {}
};

class InsufficientData : public DataError {
 public:
  using DataError::DataError;
};

class EmptyEvalSet : public DataError {
 public:
  EmptyEvalSet() : DataError("evaluation set has no scored positions") {}
};

class VocabMismatch : public DataError {
 public:
  using DataError::DataError;
};

class ArpaFormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyReference : public DataError {
 public:
  EmptyReference() : DataError("reference contains no tokens") {}
};

class IdMismatch : public DataError {
 public:
  using DataError::DataError;
};

class NoResults : public DataError {
 public:
  explicit NoResults(const std::string& id)
      : DataError("no decode results for utterance '" + id + "'") {}
};

class DecoderProtocolError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace cswitch
