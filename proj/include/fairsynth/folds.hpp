#pragma once

#include <cstdint>
#include <vector>

#include "fairsynth/dataset.hpp"
#include "fairsynth/random.hpp"

namespace fairsynth {

struct FoldAssignment {
  std::vector<std::uint32_t> fold_of_row;
  std::uint32_t k = 0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_rows(std::uint32_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < fold_of_row.size(); ++r)
      if (fold_of_row[r] == fold) out.push_back(r);
    return out;
  }

  std::vector<std::size_t> train_rows(std::uint32_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < fold_of_row.size(); ++r)
      if (fold_of_row[r] != fold) out.push_back(r);
    return out;
  }
};

/// Class-stratified k-fold split. Each class is shuffled independently, the
/// shuffled classes are concatenated (class 0 first) and dealt round-robin, so
/// fold sizes differ by at most one and per-fold class counts by at most one.
inline FoldAssignment stratified_kfold(const Dataset& d, std::uint32_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t r = 0; r < d.rows(); ++r) by_class[d.label(r)].push_back(r);
  for (int y : {0, 1})
    if (by_class[y].size() < k)
      throw Error(ErrorCode::TooFewRowsPerClass, "class " + std::to_string(y) + " has " +
                                                     std::to_string(by_class[y].size()) + " rows for k=" +
                                                     std::to_string(k));
  Rng rng(derive_seed(seed, {0x466f6c64ULL}));
  FoldAssignment out{std::vector<std::uint32_t>(d.rows()), k, seed};
  std::size_t position = 0;
  for (int y : {0, 1}) {
    shuffle_in_place(by_class[y], rng);
    for (auto r : by_class[y]) out.fold_of_row[r] = static_cast<std::uint32_t>(position++ % k);
  }
  return out;
}

}  // namespace fairsynth
