#include "w2kpe/utf8.hpp"

#include <algorithm>

namespace w2kpe::utf8 {

std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 1;  // stray continuation or invalid byte
}

std::size_t scalar_length_at(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return 0;
  return std::min(sequence_length(static_cast<unsigned char>(text[pos])),
                  text.size() - pos);
}

std::size_t scalar_count(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size(); pos += scalar_length_at(text, pos)) ++n;
  return n;
}

}  // namespace w2kpe::utf8
