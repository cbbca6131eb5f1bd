#pragma once

#include <string>
#include <vector>

namespace softpool {

/// A header row plus body rows of pre-formatted cells, rendered either as
/// CSV or as space-aligned text with a rule under the header.
struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Fixed-point text with `digits` decimals.
std::string fixed(double value, int digits);

}  // namespace softpool
