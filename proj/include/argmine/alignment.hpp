#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace argmine {

// Minimum-edit-distance alignment between two token sequences (unit costs for
// substitution, deletion and insertion; equal tokens match for free).
//
// The alignment path visits lattice points (i, j) meaning "the first i source
// tokens are aligned with the first j target tokens". Boundary maps record,
// for every boundary on one side, the furthest boundary on the other side
// that the path reaches while standing on it.
struct TokenAlignment {
  std::size_t distance = 0;
  // Size target.size() + 1. Entry j is the largest i with (i, j) on the path.
  std::vector<std::size_t> target_to_source;
  // Size source.size() + 1. Entry i is the largest j with (i, j) on the path.
  std::vector<std::size_t> source_to_target;
};

// Backtrace tie order at each cell: match, substitution, deletion (source
// token dropped), insertion (extra target token).
TokenAlignment align_tokens(std::span<const std::string_view> source,
                            std::span<const std::string_view> target);

}  // namespace argmine
