#pragma once

#include <cstdint>
#include <limits>

namespace spots {

using i16 = std::int16_t;
using i32 = std::int32_t;
using i64 = std::int64_t;
using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;

constexpr i32 kInt16Min = -32768;
constexpr i32 kInt16Max = 32767;

// The PE accumulator register is 24 bits wide.  Products are accumulated
// exactly in 32 bits; the 24-bit window is only checked against, so an
// overflowing layer is reported rather than silently wrapped.
constexpr i32 kAcc24Min = -(1 << 23);
constexpr i32 kAcc24Max = (1 << 23) - 1;

inline i16 saturate16(i64 v) {
  if (v < kInt16Min) return static_cast<i16>(kInt16Min);
  if (v > kInt16Max) return static_cast<i16>(kInt16Max);
  return static_cast<i16>(v);
}

// Inter-layer requantization: arithmetic right shift by a per-layer amount,
// then saturate into int16.  Shift 0 means plain saturation.
inline i16 requantize(i64 acc, int shift) {
  return saturate16(acc >> shift);
}

inline bool outside_acc24(i64 v) { return v < kAcc24Min || v > kAcc24Max; }

// Accumulators run in 64 bits internally and are narrowed to the stored
// 32-bit value modularly, so both engine and oracle wrap the same way if
// an input ever drives a sum past 32 bits.
inline i32 wrap32(i64 v) { return static_cast<i32>(static_cast<u64>(v)); }

}  // namespace spots
