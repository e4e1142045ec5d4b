#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace costcode {

using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;   // source block x^n
using Codeword = std::vector<Symbol>;   // string over the code alphabet 0..K-1

// Digit-string form used by the CSV/JSON interfaces. Alphabets larger than
// ten symbols are written dot-separated.
std::string to_string(const std::vector<Symbol>& s, std::size_t alphabet_size = 10);
std::vector<Symbol> parse_symbols(const std::string& text);

} // namespace costcode
