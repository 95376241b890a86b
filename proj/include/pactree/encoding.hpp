// SPDX-License-Identifier: Apache-2.0
#pragma once

// Block codecs. A codec turns the 1..2B entries of a flat node into a byte
// buffer and back. Codecs are stateless; every member is static.
//
//   encoded_size(span<const E>) -> bytes encode() will write
//   encode(span<const E>, std::byte* out)
//   decode(span<const std::byte>, count, std::vector<E>& out)   (appends)
//   destroy(std::byte*, count)   releases anything encode() constructed
//
// Codecs with random_access == true keep entries as live objects that can
// be read in place through view().

#include <bit>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "pactree/counters.hpp"
#include "pactree/entry.hpp"

namespace pactree {

enum class CodecErrc { misuse, corrupt };

class CodecError : public std::runtime_error {
 public:
  CodecError(CodecErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  CodecErrc code() const noexcept { return code_; }

 private:
  CodecErrc code_;
};

template <class C, class E>
concept BlockCodec = requires(std::span<const E> in, std::byte* out,
                              std::span<const std::byte> buf,
                              std::vector<E>& dst, std::size_t n) {
  { C::random_access } -> std::convertible_to<bool>;
  { C::encoded_size(in) } -> std::same_as<std::size_t>;
  C::encode(in, out);
  C::decode(buf, n, dst);
  C::destroy(out, n);
};

// ---------------------------------------------------------------------------
// Base-128 varints: 7 payload bits per byte, least significant group first,
// high bit set on every byte except the last.

namespace varint {

inline std::size_t size(std::uint64_t v) {
  std::size_t n = 1;
  while (v >= 0x80) {
    v >>= 7;
    ++n;
  }
  return n;
}

inline std::byte* put(std::uint64_t v, std::byte* out) {
  while (v >= 0x80) {
    *out++ = static_cast<std::byte>((v & 0x7f) | 0x80);
    v >>= 7;
  }
  *out++ = static_cast<std::byte>(v);
  return out;
}

inline std::uint64_t get(const std::byte*& p, const std::byte* end) {
  std::uint64_t v = 0;
  for (unsigned shift = 0; shift < 64; shift += 7) {
    if (p == end) throw CodecError(CodecErrc::corrupt, "truncated varint");
    const auto b = std::to_integer<std::uint64_t>(*p++);
    if (shift == 63 && (b & 0x7e))
      throw CodecError(CodecErrc::corrupt, "varint overflows 64 bits");
    v |= (b & 0x7f) << shift;
    if (!(b & 0x80)) return v;
  }
  throw CodecError(CodecErrc::corrupt, "varint longer than 10 bytes");
}

}  // namespace varint

namespace detail {

template <class T>
void store_le(const T& v, std::byte* out) {
  if constexpr (std::is_integral_v<T>) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out[i] = static_cast<std::byte>(u & 0xff);
      if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
    }
  } else {
    static_assert(std::endian::native == std::endian::little,
                  "raw value storage assumes a little-endian host");
    std::memcpy(out, &v, sizeof(T));
  }
}

template <class T>
T load_le(const std::byte* in) {
  if constexpr (std::is_integral_v<T>) {
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) {
      if constexpr (sizeof(T) > 1) u = static_cast<U>(u << 8);
      u = static_cast<U>(u | std::to_integer<U>(in[i]));
    }
    return static_cast<T>(u);
  } else {
    T v;
    std::memcpy(&v, in, sizeof(T));
    return v;
  }
}

template <class T>
inline constexpr std::size_t raw_width = std::is_empty_v<T> ? 0 : sizeof(T);

}  // namespace detail

// ---------------------------------------------------------------------------
// Entries stored as an array of live objects. Works for any copyable entry.

struct identity_encoding {
  template <class E>
  struct codec {
    static constexpr bool random_access = true;

    static std::size_t encoded_size(std::span<const E> in) {
      return in.size() * sizeof(E);
    }
    static void encode(std::span<const E> in, std::byte* out) {
      std::uninitialized_copy(in.begin(), in.end(), reinterpret_cast<E*>(out));
    }
    static void decode(std::span<const std::byte> buf, std::size_t count,
                       std::vector<E>& out) {
      if (buf.size() != count * sizeof(E))
        throw CodecError(CodecErrc::corrupt, "identity block size mismatch");
      const E* p = view(buf.data());
      out.insert(out.end(), p, p + count);
    }
    static void destroy(std::byte* p, std::size_t count) noexcept {
      std::destroy_n(reinterpret_cast<E*>(p), count);
    }
    static const E* view(const std::byte* p) {
      return std::launder(reinterpret_cast<const E*>(p));
    }
  };
};

// ---------------------------------------------------------------------------
// Difference encoding for integer keys.
// Wire format: [first key, sizeof(K) bytes LE][varint gap] x (count-1)
//              [value, sizeof(V) bytes LE] x count
// Sets (value type Unit) carry no value bytes.

struct diff_encoding {
  template <class E>
  struct codec {
    using traits = entry_traits<E>;
    using K = typename traits::key_type;
    using V = typename traits::value_type;
    static_assert(std::is_integral_v<K>,
                  "difference encoding needs integer keys");
    static_assert(std::is_trivially_copyable_v<V>,
                  "difference encoding stores values raw");

    static constexpr bool random_access = false;
    static constexpr std::size_t key_width = sizeof(K);
    static constexpr std::size_t value_width = detail::raw_width<V>;

    static std::size_t encoded_size(std::span<const E> in) {
      if (in.empty()) return 0;
      std::size_t n = key_width + in.size() * value_width;
      for (std::size_t i = 1; i < in.size(); ++i)
        n += varint::size(gap(traits::key(in[i - 1]), traits::key(in[i])));
      return n;
    }

    static void encode(std::span<const E> in, std::byte* out) {
      if (in.empty()) return;
      check_key(traits::key(in[0]));
      detail::store_le<K>(traits::key(in[0]), out);
      out += key_width;
      for (std::size_t i = 1; i < in.size(); ++i)
        out = varint::put(gap(traits::key(in[i - 1]), traits::key(in[i])), out);
      if constexpr (value_width > 0) {
        for (const E& e : in) {
          detail::store_le<V>(traits::value(e), out);
          out += value_width;
        }
      }
    }

    static void decode(std::span<const std::byte> buf, std::size_t count,
                       std::vector<E>& out) {
      if (count == 0) {
        if (!buf.empty())
          throw CodecError(CodecErrc::corrupt, "bytes after empty block");
        return;
      }
      const std::byte* p = buf.data();
      const std::byte* end = p + buf.size();
      if (buf.size() < key_width)
        throw CodecError(CodecErrc::corrupt, "truncated first key");
      const std::size_t base = out.size();
      K k = detail::load_le<K>(p);
      p += key_width;
      if constexpr (std::is_signed_v<K>)
        if (k < 0) throw CodecError(CodecErrc::corrupt, "negative key");
      out.reserve(base + count);
      out.push_back(traits::make(k, V{}));
      using U = std::make_unsigned_t<K>;
      for (std::size_t i = 1; i < count; ++i) {
        const std::uint64_t d = varint::get(p, end);
        if (d == 0) throw CodecError(CodecErrc::corrupt, "zero key gap");
        const auto room = static_cast<std::uint64_t>(
            static_cast<U>(std::numeric_limits<K>::max()) - static_cast<U>(k));
        if (d > room) throw CodecError(CodecErrc::corrupt, "key overflow");
        k = static_cast<K>(static_cast<U>(k) + static_cast<U>(d));
        out.push_back(traits::make(k, V{}));
      }
      if (static_cast<std::size_t>(end - p) != count * value_width)
        throw CodecError(CodecErrc::corrupt, "value section size mismatch");
      if constexpr (value_width > 0) {
        for (std::size_t i = 0; i < count; ++i, p += value_width)
          out[base + i] = traits::make(traits::key(out[base + i]),
                                       detail::load_le<V>(p));
      }
    }

    static void destroy(std::byte*, std::size_t) noexcept {}

   private:
    static void check_key(const K& k) {
      if constexpr (std::is_signed_v<K>)
        if (k < 0)
          throw CodecError(CodecErrc::misuse,
                           "difference encoding requires nonnegative keys");
    }
    static std::uint64_t gap(const K& a, const K& b) {
      if (!(a < b))
        throw CodecError(CodecErrc::misuse,
                         "difference encoding requires strictly increasing keys");
      using U = std::make_unsigned_t<K>;
      return static_cast<std::uint64_t>(static_cast<U>(b) - static_cast<U>(a));
    }
  };
};

template <class Encoding, class E>
using codec_for = typename Encoding::template codec<E>;

// Standalone block round trip, used by tests and tools.
template <class Encoding, class E>
std::vector<std::byte> encode_block(std::span<const E> entries) {
  using C = codec_for<Encoding, E>;
  std::vector<std::byte> buf(C::encoded_size(entries));
  if constexpr (C::random_access) {
    // identity blocks hold live objects; copy them out as raw bytes.
    static_assert(std::is_trivially_copyable_v<E>,
                  "byte image of identity blocks needs trivially copyable entries");
    if (!entries.empty()) std::memcpy(buf.data(), entries.data(), buf.size());
  } else {
    C::encode(entries, buf.data());
  }
  return buf;
}

template <class Encoding, class E>
std::vector<E> decode_block(std::span<const std::byte> buf, std::size_t count) {
  using C = codec_for<Encoding, E>;
  count_event(Event::decode);
  std::vector<E> out;
  if constexpr (C::random_access) {
    if (buf.size() != count * sizeof(E))
      throw CodecError(CodecErrc::corrupt, "identity block size mismatch");
    out.resize(count);
    if (count) std::memcpy(out.data(), buf.data(), buf.size());
  } else {
    C::decode(buf, count, out);
  }
  return out;
}

}  // namespace pactree
