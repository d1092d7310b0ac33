// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "subgen/subgen.hpp"

namespace subgen {

/**
 * Binary snapshot of a SubGen state, all fields little-endian.
 *
 *   magic    "SBGN"
 *   version  u32 (currently 1)
 *   d, t, s, m', n                    u64 each
 *   delta, mu                         f64 each
 *   centers     m' x d                f64
 *   counts      m'                    f64
 *   reservoirs  m' x t x d            f64
 *   sampler     s x (key d, value d)  f64, zeros while mu == 0
 *   rng key, rng counter              u64 each
 *
 * The trailing generator words let a restored state continue the exact
 * random sequence of the original.
 */
inline constexpr std::uint32_t kSnapshotVersion = 1;

std::vector<std::uint8_t> encode_snapshot(const SubGen& state);
SubGen decode_snapshot(std::span<const std::uint8_t> bytes);

void write_snapshot(std::ostream& out, const SubGen& state);
SubGen read_snapshot(std::istream& in);

}  // namespace subgen
