#include "poocox/pedigree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <unordered_map>

#include <fmt/format.h>

#include "poocox/errors.hpp"

namespace poocox {

namespace {

constexpr std::size_t kFixedColumns = 9;

[[noreturn]] void fail(const std::string& fam, std::span<const std::size_t> lines, std::size_t i,
                       const std::string& reason) {
  if (!lines.empty()) throw ParseError(fam, lines[i], reason);
  throw ValidationError("family " + fam + ": " + reason);
}

bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string format_real(double v) { return fmt::format("{}", v); }

}  // namespace

Pedigree::Pedigree(std::string family_id, std::vector<IndividualRecord> individuals,
                   std::span<const std::size_t> lines)
    : family_id_(std::move(family_id)), individuals_(std::move(individuals)) {
  const std::size_t n = individuals_.size();
  std::unordered_map<std::string, int> by_id;
  for (std::size_t i = 0; i < n; ++i) {
    auto& rec = individuals_[i];
    if (rec.family_id != family_id_) fail(family_id_, lines, i, "record belongs to family " + rec.family_id);
    if (!by_id.emplace(rec.individual_id, static_cast<int>(i)).second)
      fail(family_id_, lines, i, "duplicate individual id " + rec.individual_id);
    if (rec.father_id.has_value() != rec.mother_id.has_value())
      fail(family_id_, lines, i, "individual " + rec.individual_id + " has exactly one parent");
    if (!(rec.age >= 0.0) || !std::isfinite(rec.age))
      fail(family_id_, lines, i, "age must be finite and non-negative");
  }
  father_.assign(n, -1);
  mother_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = individuals_[i];
    if (rec.is_founder()) {
      founders_.push_back(static_cast<int>(i));
      continue;
    }
    auto f = by_id.find(*rec.father_id);
    if (f == by_id.end()) fail(family_id_, lines, i, "dangling father reference " + *rec.father_id);
    auto m = by_id.find(*rec.mother_id);
    if (m == by_id.end()) fail(family_id_, lines, i, "dangling mother reference " + *rec.mother_id);
    if (individuals_[f->second].sex != Sex::Male)
      fail(family_id_, lines, i, "father " + *rec.father_id + " is not male");
    if (individuals_[m->second].sex != Sex::Female)
      fail(family_id_, lines, i, "mother " + *rec.mother_id + " is not female");
    father_[i] = f->second;
    mother_[i] = m->second;
  }

  // Kahn's algorithm, always releasing the lowest file position first.
  std::vector<int> pending(n, 0);
  std::vector<std::vector<int>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (father_[i] >= 0) {
      children[father_[i]].push_back(static_cast<int>(i));
      children[mother_[i]].push_back(static_cast<int>(i));
      pending[i] = 2;
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int f : founders_) ready.push(f);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    topo_.push_back(v);
    for (int c : children[v])
      if (--pending[c] == 0) ready.push(c);
  }
  if (topo_.size() != n) {
    std::size_t culprit = 0;
    while (culprit < n && pending[culprit] == 0) ++culprit;
    fail(family_id_, lines, culprit,
         "cycle in parent graph involving individual " + individuals_[culprit].individual_id);
  }
}

std::optional<int> Pedigree::index_of(const std::string& individual_id) const {
  for (std::size_t i = 0; i < individuals_.size(); ++i)
    if (individuals_[i].individual_id == individual_id) return static_cast<int>(i);
  return std::nullopt;
}

std::size_t Pedigree::covariate_count() const noexcept {
  return individuals_.empty() ? 0 : individuals_.front().covariates.size();
}

std::vector<Pedigree> parse_ped(std::istream& in) {
  std::optional<std::size_t> declared_k;
  std::optional<std::size_t> k;
  std::vector<std::string> family_order;
  std::map<std::string, std::pair<std::vector<IndividualRecord>, std::vector<std::size_t>>> rows;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      std::string_view body = trim(view.substr(1));
      constexpr std::string_view key = "covariates:";
      if (body.substr(0, key.size()) == key) {
        double v = 0.0;
        if (!parse_double(trim(body.substr(key.size())), v) || v < 0 || v != std::floor(v))
          throw ParseError("", lineno, "bad covariate header");
        declared_k = static_cast<std::size_t>(v);
        if (k && *k != *declared_k) throw ParseError("", lineno, "covariate header disagrees with earlier rows");
        k = declared_k;
      }
      continue;
    }
    auto cols = split_ws(view);
    const std::string fam = cols.empty() ? std::string() : std::string(cols[0]);
    if (cols.size() < kFixedColumns)
      throw ParseError(fam, lineno, "expected at least 9 columns, got " + std::to_string(cols.size()));
    const std::size_t row_k = cols.size() - kFixedColumns;
    if (!k) k = row_k;
    if (row_k != *k)
      throw ParseError(fam, lineno,
                       "inconsistent covariate arity: expected " + std::to_string(*k) + ", got " +
                           std::to_string(row_k));

    IndividualRecord rec;
    rec.family_id = fam;
    rec.individual_id = std::string(cols[1]);
    const bool no_father = cols[2] == "0";
    const bool no_mother = cols[3] == "0";
    if (no_father != no_mother) throw ParseError(fam, lineno, "father and mother must both be 0 or both be set");
    if (!no_father) {
      rec.father_id = std::string(cols[2]);
      rec.mother_id = std::string(cols[3]);
    }
    if (cols[4] == "1")
      rec.sex = Sex::Male;
    else if (cols[4] == "2")
      rec.sex = Sex::Female;
    else
      throw ParseError(fam, lineno, "sex must be 1 or 2, got '" + std::string(cols[4]) + "'");
    if (!parse_double(cols[5], rec.age)) throw ParseError(fam, lineno, "non-numeric age '" + std::string(cols[5]) + "'");
    if (!(rec.age >= 0.0) || !std::isfinite(rec.age)) throw ParseError(fam, lineno, "age must be finite and non-negative");
    if (cols[6] == "0")
      rec.status = Status::Censored;
    else if (cols[6] == "1")
      rec.status = Status::Affected;
    else
      throw ParseError(fam, lineno, "status must be 0 or 1, got '" + std::string(cols[6]) + "'");
    if (cols[7] == "0")
      rec.gene_test = GeneTest::Negative;
    else if (cols[7] == "1")
      rec.gene_test = GeneTest::Positive;
    else if (cols[7] == "-9" || cols[7] == ".")
      rec.gene_test = GeneTest::Missing;
    else
      throw ParseError(fam, lineno, "gene_test must be 0, 1, -9 or '.', got '" + std::string(cols[7]) + "'");
    if (cols[8] == "0")
      rec.proband = false;
    else if (cols[8] == "1")
      rec.proband = true;
    else
      throw ParseError(fam, lineno, "proband must be 0 or 1, got '" + std::string(cols[8]) + "'");
    rec.covariates.resize(row_k);
    for (std::size_t c = 0; c < row_k; ++c)
      if (!parse_double(cols[kFixedColumns + c], rec.covariates[c]) || !std::isfinite(rec.covariates[c]))
        throw ParseError(fam, lineno, "non-numeric covariate '" + std::string(cols[kFixedColumns + c]) + "'");

    auto [it, inserted] = rows.try_emplace(fam);
    if (inserted) family_order.push_back(fam);
    it->second.first.push_back(std::move(rec));
    it->second.second.push_back(lineno);
  }
  if (in.bad()) throw IoError("read error while parsing PED input");

  std::vector<Pedigree> out;
  out.reserve(family_order.size());
  for (const auto& fam : family_order) {
    auto& [recs, lines] = rows.at(fam);
    out.emplace_back(fam, std::move(recs), lines);
  }
  return out;
}

std::vector<Pedigree> read_ped_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open PED file " + path);
  return parse_ped(in);
}

void write_ped(std::ostream& out, const std::vector<Pedigree>& families) {
  const std::size_t k = families.empty() ? 0 : families.front().covariate_count();
  out << "# covariates: " << k << '\n';
  for (const auto& ped : families) {
    for (const auto& r : ped.individuals()) {
      out << r.family_id << ' ' << r.individual_id << ' ' << r.father_id.value_or("0") << ' '
          << r.mother_id.value_or("0") << ' ' << static_cast<int>(r.sex) << ' ' << format_real(r.age) << ' '
          << static_cast<int>(r.status) << ' ';
      switch (r.gene_test) {
        case GeneTest::Negative: out << '0'; break;
        case GeneTest::Positive: out << '1'; break;
        case GeneTest::Missing: out << "-9"; break;
      }
      out << ' ' << (r.proband ? 1 : 0);
      for (double c : r.covariates) out << ' ' << format_real(c);
      out << '\n';
    }
  }
}

std::vector<ValidationWarning> validate(const Pedigree& pedigree) {
  std::vector<ValidationWarning> out;
  std::size_t probands = 0;
  for (const auto& r : pedigree.individuals())
    if (r.proband) ++probands;
  if (probands > 1)
    out.push_back({pedigree.family_id(), "", "multiple-probands",
                   "multiple probands (" + std::to_string(probands) + ") in family " + pedigree.family_id()});
  return out;
}

void apply_origin_sidecar(std::istream& in, std::vector<Pedigree>& families) {
  std::map<std::string, std::size_t> fam_index;
  for (std::size_t f = 0; f < families.size(); ++f) fam_index.emplace(families[f].family_id(), f);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto cols = split_ws(view);
    const std::string fam = std::string(cols[0]);
    if (cols.size() != 3) throw ParseError(fam, lineno, "origin sidecar rows need 3 columns");
    auto f = fam_index.find(fam);
    if (f == fam_index.end()) throw ParseError(fam, lineno, "unknown family");
    auto& ped = families[f->second];
    auto idx = ped.index_of(std::string(cols[1]));
    if (!idx) throw ParseError(fam, lineno, "unknown individual " + std::string(cols[1]));
    auto g = genotype_from_origin_label(cols[2]);
    if (!g) throw ParseError(fam, lineno, "origin must be pat, mat, both or none");
    ped.record(static_cast<std::size_t>(*idx)).pinned_genotype = *g;
  }
}

std::string_view genotype_label(OrderedGenotype g) noexcept {
  switch (g) {
    case OrderedGenotype::NonCarrier: return "0";
    case OrderedGenotype::HetPaternal: return "1p";
    case OrderedGenotype::HetMaternal: return "1m";
    case OrderedGenotype::Homozygous: return "2";
  }
  return "?";
}

std::optional<OrderedGenotype> parse_genotype_label(std::string_view s) noexcept {
  for (auto g : kAllGenotypes)
    if (genotype_label(g) == s) return g;
  return std::nullopt;
}

std::string_view origin_label(OrderedGenotype g) noexcept {
  switch (g) {
    case OrderedGenotype::NonCarrier: return "none";
    case OrderedGenotype::HetPaternal: return "pat";
    case OrderedGenotype::HetMaternal: return "mat";
    case OrderedGenotype::Homozygous: return "both";
  }
  return "?";
}

std::optional<OrderedGenotype> genotype_from_origin_label(std::string_view s) noexcept {
  for (auto g : kAllGenotypes)
    if (origin_label(g) == s) return g;
  return std::nullopt;
}

}  // namespace poocox
