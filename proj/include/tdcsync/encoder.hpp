#pragma once

#include "tdcsync/tdl.hpp"

namespace tdcsync {

struct BinaryCode {
    int code = 0;          // ones count of the sample
    int bubble_count = 0;  // isolated 1s found past the first falling edge
};

// Ones-count encoder: the output code is the population count of the sample,
// so any single bit flip moves the code by exactly 1 regardless of where the
// bubble sits. bubble_count reports how many 0->1 transitions appear after
// the first 1->0 transition, which is the encoder's estimate of how corrupted
// the pattern is (0 for a clean thermometer).
BinaryCode encode_ones_count(const ThermometerSample& sample);

// True when the sample is a clean thermometer pattern: all 1s (if any)
// followed by all 0s.
bool is_clean_thermometer(const ThermometerSample& sample);

}  // namespace tdcsync
