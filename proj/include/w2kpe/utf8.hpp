#pragma once

#include <cstddef>
#include <string_view>

namespace w2kpe::utf8 {

// Byte length of the UTF-8 sequence starting with `lead`. Malformed lead
// bytes count as a 1-byte sequence so scanning never throws or stalls.
std::size_t sequence_length(unsigned char lead);

// Length in bytes of the scalar at `pos`, clipped to the end of `text`.
std::size_t scalar_length_at(std::string_view text, std::size_t pos);

// Number of Unicode scalars in `text`.
std::size_t scalar_count(std::string_view text);

}  // namespace w2kpe::utf8
