#pragma once

#include <stdexcept>
#include <string>

namespace adsqa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input files: schema violations, duplicate ids, unparseable lines.
class CorpusError : public Error {
 public:
  using Error::Error;
};

class ClassifierError : public Error {
 public:
  using Error::Error;
};

// Conflicting keyword identifiers while building a trie.
class LexiconError : public Error {
 public:
  using Error::Error;
};

// The question cannot be turned into conditions: dangling comparator or
// negation, a number that fits no attribute, no conditions at all.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

// Contradictory numeric bounds. The message is always the user-facing
// "search retrieved no results".
class ContradictionError : public Error {
 public:
  ContradictionError() : Error(kMessage) {}
  static constexpr const char* kMessage = "search retrieved no results";
};

}  // namespace adsqa
