// Copyright (C) 2026 The subgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

namespace subgen::byteio {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class Writer {
public:
    void u32(std::uint32_t x) { put(x); }
    void u64(std::uint64_t x) { put(x); }
    void f64(double x) { put(std::bit_cast<std::uint64_t>(x)); }
    void raw(std::span<const std::uint8_t> bytes) { m_buf.insert(m_buf.end(), bytes.begin(), bytes.end()); }
    void f64s(std::span<const double> xs) {
        for (double x : xs) {
            f64(x);
        }
    }

    std::vector<std::uint8_t>& buffer() { return m_buf; }

private:
    template <typename T>
    void put(T x) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            m_buf.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
        }
    }

    std::vector<std::uint8_t> m_buf;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : m_bytes(bytes) {}

    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    std::span<const std::uint8_t> raw(std::size_t n) {
        need(n);
        auto out = m_bytes.subspan(m_pos, n);
        m_pos += n;
        return out;
    }
    void f64s(std::span<double> out) {
        need(out.size() * 8);
        for (double& x : out) {
            x = f64();
        }
    }

    std::size_t remaining() const { return m_bytes.size() - m_pos; }

private:
    void need(std::size_t n) const {
        if (m_bytes.size() - m_pos < n) {
            throw std::runtime_error("truncated binary payload");
        }
    }

    template <typename T>
    T get() {
        need(sizeof(T));
        T x = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            x |= static_cast<T>(m_bytes[m_pos + i]) << (8 * i);
        }
        m_pos += sizeof(T);
        return x;
    }

    std::span<const std::uint8_t> m_bytes;
    std::size_t m_pos = 0;
};

}  // namespace subgen::byteio
