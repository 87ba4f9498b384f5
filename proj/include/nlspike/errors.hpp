#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nlspike {

/// Precondition or pairing violated by the caller.
class contract_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Denominator too small to yield a nonzero base threshold.
class DenominatorUnderflow : public std::runtime_error {
 public:
  DenominatorUnderflow(std::int64_t accumulated, std::int64_t minimum)
      : std::runtime_error("denominator " + std::to_string(accumulated) +
                           " below minimum representable denominator " +
                           std::to_string(minimum)),
        accumulated_(accumulated),
        minimum_(minimum) {}

  std::int64_t accumulated() const noexcept { return accumulated_; }
  std::int64_t minimum() const noexcept { return minimum_; }

 private:
  std::int64_t accumulated_;
  std::int64_t minimum_;
};

inline void require(bool ok, const char* what) {
  if (!ok) throw contract_error(what);
}

}  // namespace nlspike
