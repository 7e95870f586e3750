#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"

namespace polyclone {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;

/// Saturating base^exponent; returns max() on overflow.
inline std::uint64_t checked_power(std::uint64_t base, std::uint64_t exponent) {
    std::uint64_t result = 1;
    for (std::uint64_t i = 0; i < exponent; ++i) {
        if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base)
            return std::numeric_limits<std::uint64_t>::max();
        result *= base;
    }
    return result;
}

/// Lexicographic bijection between {0..base-1}^length and {0..base^length-1}.
/// The first coordinate is the most significant digit.
class TupleCoding {
public:
    TupleCoding(std::size_t base, std::size_t length) : base_(base), length_(length) {
        if (base == 0) throw ValidationError("tuple coding base must be positive");
        count_ = checked_power(base, length);
        if (count_ == std::numeric_limits<std::uint64_t>::max())
            throw CapacityError("tuple coding range overflows 64 bits");
    }

    std::size_t base() const noexcept { return base_; }
    std::size_t length() const noexcept { return length_; }
    std::uint64_t count() const noexcept { return count_; }

    std::uint64_t encode(std::span<const Element> v) const {
        if (v.size() != length_) throw ValidationError("tuple length does not match coding");
        std::uint64_t code = 0;
        for (Element x : v) {
            if (x >= base_) throw ValidationError("tuple entry exceeds coding base");
            code = code * base_ + x;
        }
        return code;
    }

    Tuple decode(std::uint64_t code) const {
        Tuple v(length_);
        decode_into(code, v);
        return v;
    }

    void decode_into(std::uint64_t code, std::span<Element> out) const {
        if (code >= count_) throw ValidationError("code out of range for tuple coding");
        for (std::size_t i = length_; i-- > 0;) {
            out[i] = static_cast<Element>(code % base_);
            code /= base_;
        }
    }

private:
    std::size_t base_;
    std::size_t length_;
    std::uint64_t count_ = 0;
};

/// Odometer over {0..base-1}^length in lexicographic order.
class TupleOdometer {
public:
    TupleOdometer(std::size_t base, std::size_t length) : base_(base), digits_(length, 0) {
        done_ = base == 0 && length > 0;
    }
    bool done() const noexcept { return done_; }
    const Tuple& current() const noexcept { return digits_; }
    void next() {
        for (std::size_t i = digits_.size(); i-- > 0;) {
            if (++digits_[i] < base_) return;
            digits_[i] = 0;
        }
        done_ = true;
    }

private:
    std::size_t base_;
    Tuple digits_;
    bool done_ = false;
};

} // namespace polyclone
