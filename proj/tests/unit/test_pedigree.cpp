#include <doctest.h>

#include <sstream>

#include "poocox/errors.hpp"
#include "poocox/pedigree.hpp"
#include "poocox/simulator.hpp"

using namespace poocox;

namespace {

std::vector<Pedigree> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ped(in);
}

const char* kTrio =
    "F1 1 0 0 1 70.0 0 -9 0\n"
    "F1 2 0 0 2 65.5 0 0 0\n"
    "F1 3 1 2 1 45.0 1 -9 0\n";

}  // namespace

TEST_CASE("non-founder row maps onto record fields") {
  const auto fams = parse(kTrio);
  REQUIRE(fams.size() == 1);
  const auto& r = fams[0][2];
  CHECK(r.individual_id == "3");
  CHECK(r.father_id == "1");
  CHECK(r.mother_id == "2");
  CHECK(r.sex == Sex::Male);
  CHECK(r.age == 45.0);
  CHECK(r.status == Status::Affected);
  CHECK(r.gene_test == GeneTest::Missing);
  CHECK_FALSE(r.proband);
  CHECK_FALSE(r.is_founder());
}

TEST_CASE("zero parents encode a founder") {
  const auto fams = parse(kTrio);
  const auto& r = fams[0][0];
  CHECK(r.is_founder());
  CHECK_FALSE(r.father_id.has_value());
  CHECK_FALSE(r.mother_id.has_value());
  CHECK(fams[0].founders() == std::vector<int>{0, 1});
}

TEST_CASE("dangling parent is reported with line and id") {
  try {
    parse("F1 1 0 0 1 70 0 -9 0\nF1 2 0 0 2 60 0 -9 0\nF1 3 1 9 1 45 1 -9 0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.family_id() == "F1");
    CHECK(std::string(e.what()).find('9') != std::string::npos);
  }
}

TEST_CASE("structural errors are ParseErrors with line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  // Mother listed in the father column.
  CHECK(line_of("F1 1 0 0 1 70 0 -9 0\nF1 2 0 0 2 60 0 -9 0\nF1 3 2 1 1 45 1 -9 0\n") == 3);
  // Individual is its own grandparent.
  CHECK(line_of("F1 1 3 2 1 70 0 -9 0\nF1 2 0 0 2 60 0 -9 0\nF1 3 1 2 1 45 1 -9 0\n") != 0);
  CHECK(line_of("F1 1 0 0 1 70 0 -9\n") == 1);
  CHECK(line_of("F1 1 0 0 1 abc 0 -9 0\n") == 1);
  CHECK(line_of("F1 1 0 0 1 -3 0 -9 0\n") == 1);
  CHECK(line_of("F1 1 0 0 3 30 0 -9 0\n") == 1);
  CHECK(line_of("F1 1 0 0 1 30 2 -9 0\n") == 1);
  CHECK(line_of("F1 1 0 0 1 30 0 7 0\n") == 1);
  CHECK(line_of("F1 1 0 0 1 30 0 -9 0\nF1 1 0 0 2 30 0 -9 0\n") == 2);
  CHECK(line_of("F1 1 0 0 1 30 0 -9 0\nF1 2 0 0 2 30 0 -9 0\nF1 3 1 0 2 30 0 -9 0\n") == 3);
  CHECK(line_of("# covariates: 1\nF1 1 0 0 1 30 0 -9 0 0.5\nF1 2 0 0 2 30 0 -9 0\n") == 3);
}

TEST_CASE("comments, dot marker and covariates") {
  const auto fams = parse(
      "# covariates: 2\n"
      "# a comment\n"
      "\n"
      "F1 1 0 0 1 70 0 . 1 0.5 -1\n"
      "F2 1 0 0 2 50 1 1 0 1e-3 2\n"
      "F1 2 0 0 2 60 0 0 0 0 0\n");
  REQUIRE(fams.size() == 2);
  CHECK(fams[0].family_id() == "F1");
  CHECK(fams[0].size() == 2);
  CHECK(fams[1].family_id() == "F2");
  CHECK(fams[0][0].gene_test == GeneTest::Missing);
  CHECK(fams[0][0].proband);
  CHECK(fams[1][0].covariates == std::vector<double>{1e-3, 2.0});
  CHECK(fams[0].covariate_count() == 2);
}

TEST_CASE("topological order visits parents first") {
  // Child listed before its parents.
  const auto fams = parse(
      "F1 3 1 2 1 20 0 -9 0\n"
      "F1 4 3 5 2 5 0 -9 0\n"
      "F1 1 0 0 1 70 0 -9 0\n"
      "F1 2 0 0 2 60 0 -9 0\n"
      "F1 5 0 0 2 30 0 -9 0\n");
  const auto& ped = fams[0];
  std::vector<int> position(ped.size());
  const auto& topo = ped.topological_order();
  REQUIRE(topo.size() == ped.size());
  for (std::size_t k = 0; k < topo.size(); ++k) position[static_cast<std::size_t>(topo[k])] = static_cast<int>(k);
  for (std::size_t i = 0; i < ped.size(); ++i)
    if (ped.father(i) >= 0) {
      CHECK(position[static_cast<std::size_t>(ped.father(i))] < position[i]);
      CHECK(position[static_cast<std::size_t>(ped.mother(i))] < position[i]);
    }
}

TEST_CASE("write then parse yields identical records") {
  SimulationConfig cfg;
  cfg.families = 5;
  const auto truth = simulate_truth(cfg, 11);
  const auto masked = apply_scenario_mask(truth, Scenario::S1, 11);
  std::ostringstream out;
  write_ped(out, masked);
  std::istringstream in(out.str());
  const auto back = parse_ped(in);
  REQUIRE(back.size() == masked.size());
  for (std::size_t f = 0; f < back.size(); ++f) CHECK(back[f] == masked[f]);

  std::vector<Pedigree> with_cov = parse("# covariates: 1\nF1 1 0 0 1 0.1 0 -9 0 0.30000000000000004\n");
  std::ostringstream out2;
  write_ped(out2, with_cov);
  std::istringstream in2(out2.str());
  CHECK(parse_ped(in2)[0] == with_cov[0]);
}

TEST_CASE("validation warnings") {
  auto two = parse("F1 1 0 0 1 70 1 -9 1\nF1 2 0 0 2 60 1 -9 1\n");
  const auto w = validate(two[0]);
  REQUIRE(w.size() == 1);
  CHECK(w[0].code == "multiple-probands");
  CHECK(w[0].message.find("multiple probands") != std::string::npos);

  auto neg = parse("F1 1 0 0 1 70 1 0 0\n");
  CHECK(validate(neg[0]).empty());

  SimulationConfig cfg;
  cfg.families = 20;
  for (const auto& fam : simulate_families(cfg, Scenario::S1, 4).families) CHECK(validate(fam).empty());
}

TEST_CASE("origin sidecar pins ordered genotypes") {
  auto fams = parse(kTrio);
  std::istringstream side("F1 3 pat\nF1 2 both\n");
  apply_origin_sidecar(side, fams);
  CHECK(fams[0][2].pinned_genotype == OrderedGenotype::HetPaternal);
  CHECK(fams[0][1].pinned_genotype == OrderedGenotype::Homozygous);
  CHECK_FALSE(fams[0][0].pinned_genotype.has_value());

  std::istringstream bad("F1 7 pat\n");
  CHECK_THROWS_AS(apply_origin_sidecar(bad, fams), ParseError);
  std::istringstream bad_origin("F1 3 uncle\n");
  CHECK_THROWS_AS(apply_origin_sidecar(bad_origin, fams), ParseError);
}

TEST_CASE("missing file is an I/O error") { CHECK_THROWS_AS(read_ped_file("/nonexistent/x.ped"), IoError); }
