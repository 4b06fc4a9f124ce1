#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace emailad {

// Fold id per row. Each class is shuffled with the seed and dealt
// round-robin; the dealing counter carries over from one class to the next
// so fold sizes differ by at most one. Throws InvalidArgument when folds < 2
// or folds exceeds the row count.
std::vector<std::size_t> stratified_fold_assignment(std::span<const int> y, std::size_t folds, std::uint64_t seed);

}  // namespace emailad
