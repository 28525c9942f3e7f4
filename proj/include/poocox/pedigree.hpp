#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poocox/genotype.hpp"

namespace poocox {

enum class Sex { Male = 1, Female = 2 };
enum class Status { Censored = 0, Affected = 1 };
enum class GeneTest { Negative = 0, Positive = 1, Missing = -9 };

struct IndividualRecord {
  std::string family_id;
  std::string individual_id;
  std::optional<std::string> father_id;
  std::optional<std::string> mother_id;
  Sex sex = Sex::Male;
  double age = 0.0;  // T_i: age at diagnosis if affected, else at last follow-up
  Status status = Status::Censored;
  GeneTest gene_test = GeneTest::Missing;
  bool proband = false;
  std::vector<double> covariates;

  // Set by proband correction; the (age, status) pair is then ignored.
  bool phenotype_suppressed = false;
  // Hard evidence on the ordered genotype (known parent of origin). Never
  // written to PED files; comes from a parent-of-origin sidecar.
  std::optional<OrderedGenotype> pinned_genotype;

  bool is_founder() const noexcept { return !father_id.has_value(); }
  bool affected() const noexcept { return status == Status::Affected; }

  friend bool operator==(const IndividualRecord&, const IndividualRecord&) = default;
};

/// One family. Individuals keep file order; parents are referenced by
/// position within `individuals` (-1 for founders).
class Pedigree {
 public:
  Pedigree() = default;
  /// Resolves parent ids and checks structural invariants. Throws
  /// ValidationError on dangling/sex-inconsistent parents or cycles; when
  /// `lines` (one per record) is given the error is a ParseError naming it.
  Pedigree(std::string family_id, std::vector<IndividualRecord> individuals,
           std::span<const std::size_t> lines = {});

  const std::string& family_id() const noexcept { return family_id_; }
  std::size_t size() const noexcept { return individuals_.size(); }
  const std::vector<IndividualRecord>& individuals() const noexcept { return individuals_; }
  const IndividualRecord& operator[](std::size_t i) const { return individuals_[i]; }

  int father(std::size_t i) const { return father_[i]; }
  int mother(std::size_t i) const { return mother_[i]; }
  const std::vector<int>& founders() const noexcept { return founders_; }
  /// Parents-before-children order; ties resolved by file position.
  const std::vector<int>& topological_order() const noexcept { return topo_; }
  std::optional<int> index_of(const std::string& individual_id) const;
  std::size_t covariate_count() const noexcept;

  /// Mutable access for evidence edits that keep structure intact
  /// (phenotype suppression, pins, masks). Links must not be changed.
  IndividualRecord& record(std::size_t i) { return individuals_[i]; }

  friend bool operator==(const Pedigree& a, const Pedigree& b) {
    return a.family_id_ == b.family_id_ && a.individuals_ == b.individuals_;
  }

 private:
  std::string family_id_;
  std::vector<IndividualRecord> individuals_;
  std::vector<int> father_;
  std::vector<int> mother_;
  std::vector<int> founders_;
  std::vector<int> topo_;
};

/// Parse PED phenotype rows. One Pedigree per distinct family id, in order of
/// first appearance. Throws ParseError with line number and family id.
std::vector<Pedigree> parse_ped(std::istream& in);
std::vector<Pedigree> read_ped_file(const std::string& path);

void write_ped(std::ostream& out, const std::vector<Pedigree>& families);

struct ValidationWarning {
  std::string family_id;
  std::string individual_id;  // empty for family-level findings
  std::string code;
  std::string message;
};

/// Non-fatal findings; an empty result means the family is clean.
std::vector<ValidationWarning> validate(const Pedigree& pedigree);

/// Read a parent-of-origin sidecar (`family_id individual_id poo`) and pin
/// the matching individuals' ordered genotypes. Unknown ids are an error.
void apply_origin_sidecar(std::istream& in, std::vector<Pedigree>& families);

}  // namespace poocox
