#include "tdcsync/encoder.hpp"

#include <bit>
#include <cstdint>

namespace tdcsync {

BinaryCode encode_ones_count(const ThermometerSample& sample) {
    BinaryCode out;
    out.code = sample.popcount();

    // Word-level transition count. In any bit string at most one rising edge
    // can precede the first falling edge (the prefix up to that point is
    // 0...01...1), so:
    //   bubbles = total rises - (1 if the string starts with 0 and has a 1)
    // whenever a falling edge exists, and 0 otherwise.
    const int n = sample.length();
    if (n == 0) return out;

    std::uint64_t rises = 0, falls = 0;
    std::uint64_t carry = 0;  // last bit of the previous word
    const auto& words = sample.words();
    for (std::size_t w = 0; w < words.size(); ++w) {
        const std::uint64_t cur = words[w];
        const std::uint64_t prev = (cur << 1) | carry;
        std::uint64_t valid = ~0ull;
        if (w + 1 == words.size() && (n & 63) != 0)
            valid = (1ull << (n & 63)) - 1;
        // Bit 0 of the string has no predecessor and forms no transition.
        if (w == 0) valid &= ~1ull;
        rises += static_cast<std::uint64_t>(std::popcount(cur & ~prev & valid));
        falls += static_cast<std::uint64_t>(std::popcount(~cur & prev & valid));
        carry = (cur >> 63) & 1u;
    }

    if (falls > 0) {
        const bool rise_before_fall = !sample.get(0) && out.code > 0;
        out.bubble_count = static_cast<int>(rises) - (rise_before_fall ? 1 : 0);
    }
    return out;
}

bool is_clean_thermometer(const ThermometerSample& sample) {
    const ThermometerSample reference =
        ThermometerSample::clean(sample.length(), sample.popcount());
    return sample.words() == reference.words();
}

}  // namespace tdcsync
