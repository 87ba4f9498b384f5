#include "nlspike/opcount.hpp"

namespace nlspike {

OpScope::OpScope(OpTally& tally) : previous_(ops::detail::active_tally) {
  ops::detail::active_tally = &tally;
}

OpScope::~OpScope() { ops::detail::active_tally = previous_; }

}  // namespace nlspike
