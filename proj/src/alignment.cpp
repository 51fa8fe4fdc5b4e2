#include "argmine/alignment.hpp"

#include <algorithm>
#include <cstdint>

namespace argmine {

TokenAlignment align_tokens(std::span<const std::string_view> source,
                            std::span<const std::string_view> target) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  const std::size_t width = m + 1;
  std::vector<std::uint32_t> cost((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return cost[i * width + j]; };

  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = at(i - 1, j - 1) + (source[i - 1] == target[j - 1] ? 0u : 1u);
      at(i, j) = std::min({diag, at(i - 1, j) + 1u, at(i, j - 1) + 1u});
    }
  }

  TokenAlignment result;
  result.distance = at(n, m);
  result.target_to_source.assign(m + 1, 0);
  result.source_to_target.assign(n + 1, 0);

  // Walking backwards, the first visit to a row/column carries the largest
  // partner index.
  std::vector<bool> seen_target(m + 1, false);
  std::vector<bool> seen_source(n + 1, false);
  auto visit = [&](std::size_t i, std::size_t j) {
    if (!seen_target[j]) {
      seen_target[j] = true;
      result.target_to_source[j] = i;
    }
    if (!seen_source[i]) {
      seen_source[i] = true;
      result.source_to_target[i] = j;
    }
  };

  std::size_t i = n;
  std::size_t j = m;
  visit(i, j);
  while (i > 0 || j > 0) {
    const std::uint32_t here = at(i, j);
    if (i > 0 && j > 0 && source[i - 1] == target[j - 1] && at(i - 1, j - 1) == here) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && at(i - 1, j - 1) + 1 == here) {
      --i;
      --j;
    } else if (i > 0 && at(i - 1, j) + 1 == here) {
      --i;
    } else {
      --j;
    }
    visit(i, j);
  }
  return result;
}

}  // namespace argmine
