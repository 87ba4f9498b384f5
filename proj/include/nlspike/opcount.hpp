#pragma once

#include <cstdint>

namespace nlspike {

/// Operation tally. MAC: multiply by a non-power-of-two multiplicand.
/// AC: add, subtract, compare or accumulate. Shift: power-of-two scaling.
struct OpTally {
  std::uint64_t macs = 0;
  std::uint64_t acs = 0;
  std::uint64_t shifts = 0;

  friend bool operator==(const OpTally&, const OpTally&) = default;
};

namespace ops {

namespace detail {
inline thread_local OpTally* active_tally = nullptr;
}

/// Tally receiving counts on this thread, or null when counting is off.
inline OpTally* active() { return detail::active_tally; }

inline void ac(std::uint64_t n = 1) {
  if (auto* t = active()) t->acs += n;
}
inline void shift(std::uint64_t n = 1) {
  if (auto* t = active()) t->shifts += n;
}
inline void mac(std::uint64_t n = 1) {
  if (auto* t = active()) t->macs += n;
}

}  // namespace ops

/// Routes instrumented arithmetic on the current thread into `tally`
/// for the lifetime of the scope. Scopes nest; the innermost wins.
class OpScope {
 public:
  explicit OpScope(OpTally& tally);
  ~OpScope();
  OpScope(const OpScope&) = delete;
  OpScope& operator=(const OpScope&) = delete;

 private:
  OpTally* previous_;
};

}  // namespace nlspike
