#ifndef STEERBIAS_ERRORS_HPP
#define STEERBIAS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace steerbias {

/// Thrown when a constructed object violates one of its structural
/// invariants (bad multiplication table, non-homomorphic matrices, ...).
/// The message names the offending element/pair/triple.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace steerbias

#endif  // STEERBIAS_ERRORS_HPP
