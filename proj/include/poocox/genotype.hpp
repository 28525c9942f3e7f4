#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace poocox {

/// Ordered genotype at the disease locus. Bit 0 is the paternal allele,
/// bit 1 the maternal allele; a set bit means the allele carries the mutation.
enum class OrderedGenotype : std::uint8_t {
  NonCarrier = 0,   // 0
  HetPaternal = 1,  // 1p: mutation inherited from the father
  HetMaternal = 2,  // 1m: mutation inherited from the mother
  Homozygous = 3,   // 2
};

inline constexpr int kGenotypeStates = 4;

inline constexpr std::array<OrderedGenotype, kGenotypeStates> kAllGenotypes = {
    OrderedGenotype::NonCarrier, OrderedGenotype::HetPaternal, OrderedGenotype::HetMaternal,
    OrderedGenotype::Homozygous};

constexpr int index(OrderedGenotype g) noexcept { return static_cast<int>(g); }
constexpr OrderedGenotype genotype_from_index(int i) noexcept { return static_cast<OrderedGenotype>(i & 3); }

constexpr bool paternal_mutated(OrderedGenotype g) noexcept { return (index(g) & 1) != 0; }
constexpr bool maternal_mutated(OrderedGenotype g) noexcept { return (index(g) & 2) != 0; }
constexpr bool is_carrier(OrderedGenotype g) noexcept { return g != OrderedGenotype::NonCarrier; }
constexpr int mutated_alleles(OrderedGenotype g) noexcept {
  return int(paternal_mutated(g)) + int(maternal_mutated(g));
}

constexpr OrderedGenotype make_genotype(bool paternal, bool maternal) noexcept {
  return static_cast<OrderedGenotype>(int(paternal) | (int(maternal) << 1));
}

/// Relabel 1p <-> 1m (swap the roles of the two parents).
constexpr OrderedGenotype swap_origin(OrderedGenotype g) noexcept {
  return make_genotype(maternal_mutated(g), paternal_mutated(g));
}

/// Text label used in sidecar files: 0, 1p, 1m, 2.
std::string_view genotype_label(OrderedGenotype g) noexcept;
std::optional<OrderedGenotype> parse_genotype_label(std::string_view s) noexcept;

/// Parent of origin of a carrier's mutation: pat, mat, both (homozygote), none.
std::string_view origin_label(OrderedGenotype g) noexcept;
std::optional<OrderedGenotype> genotype_from_origin_label(std::string_view s) noexcept;

}  // namespace poocox
