#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "fairsynth/generators/cart.hpp"
#include "fairsynth/generators/copula.hpp"
#include "fairsynth/generators/smote.hpp"
#include "fairsynth/partition.hpp"
#include "fairsynth/strategies.hpp"

namespace fairsynth {

enum class GeneratorKind { GaussianCopula, CartChain, SmoteNC };

inline constexpr std::array<GeneratorKind, 3> kAllGenerators = {GeneratorKind::GaussianCopula,
                                                                GeneratorKind::CartChain, GeneratorKind::SmoteNC};

inline std::string_view to_string(GeneratorKind g) {
  switch (g) {
    case GeneratorKind::GaussianCopula: return "copula";
    case GeneratorKind::CartChain: return "cart";
    case GeneratorKind::SmoteNC: return "smote-nc";
  }
  return "copula";
}

inline std::optional<GeneratorKind> parse_generator(std::string_view name) {
  for (auto g : kAllGenerators)
    if (to_string(g) == name) return g;
  return std::nullopt;
}

/// A fitted generator. Immutable; sample() may be called concurrently.
class GeneratorModel {
 public:
  using Impl = std::variant<CopulaModel, CartChainModel, SmoteModel>;

  explicit GeneratorModel(Impl impl) : impl_(std::move(impl)) {}

  GeneratorKind kind() const noexcept { return static_cast<GeneratorKind>(impl_.index()); }

  RowBatch sample(std::size_t n, std::uint64_t seed) const {
    return std::visit([&](const auto& m) { return m.sample(n, seed); }, impl_);
  }

  const Impl& impl() const noexcept { return impl_; }

 private:
  Impl impl_;
};

inline GeneratorModel fit(GeneratorKind kind, const Dataset& d, std::span<const std::size_t> rows,
                          std::uint64_t seed) {
  switch (kind) {
    case GeneratorKind::GaussianCopula: return GeneratorModel(CopulaModel::fit(d, rows, seed));
    case GeneratorKind::CartChain: return GeneratorModel(CartChainModel::fit(d, rows));
    case GeneratorKind::SmoteNC: return GeneratorModel(SmoteModel::fit(d, rows));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown generator");
}

inline std::uint64_t subgroup_seed(std::uint64_t seed, const SubgroupKey& key) {
  std::uint64_t h = derive_seed(seed, {static_cast<std::uint64_t>(key.class_label)});
  for (auto v : key.protected_values) h = derive_seed(h, {v});
  return h;
}

/// Fits one generator per subgroup with a positive count and samples exactly
/// that many rows. Protected and target cells of every batch are set to the
/// subgroup's values. Errors name the subgroup they came from.
inline SyntheticBatches fit_and_sample_plan(GeneratorKind kind, const Dataset& d, const SubgroupPartition& part,
                                            const SamplingPlan& plan, std::uint64_t seed) {
  SyntheticBatches out;
  const auto& schema = d.schema();
  for (const auto& [key, n] : plan.to_sample) {
    RowBatch batch(d.cols());
    if (n > 0) {
      auto it = part.groups.find(key);
      if (it == part.groups.end()) throw Error(ErrorCode::EmptyRequiredSubgroup, key_label(d, key));
      const std::uint64_t s = subgroup_seed(seed, key);
      try {
        batch = fit(kind, d, it->second, derive_seed(s, {1})).sample(n, derive_seed(s, {2}));
      } catch (const Error& e) {
        throw Error(e.code(), "subgroup " + key_label(d, key) + ": " + e.detail());
      }
      for (std::size_t r = 0; r < batch.rows(); ++r) {
        batch.at(r, schema.target_index()) = key.class_label;
        for (std::size_t i = 0; i < key.protected_values.size(); ++i)
          batch.at(r, schema.protected_indices()[i]) = key.protected_values[i];
      }
    }
    out.emplace(key, std::move(batch));
  }
  return out;
}

}  // namespace fairsynth
