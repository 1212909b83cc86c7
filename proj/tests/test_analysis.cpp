// EOCs, convergence driver and CSV reporting.
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hho/analysis.hpp"
#include "hho/errors.hpp"
#include "hho/problems.hpp"

using namespace hho;

namespace {

std::string temp_path(const std::string &name) {
  const auto p = std::filesystem::temp_directory_path() / ("hho_test_" + name);
  std::filesystem::remove(p);
  return p.string();
}

std::vector<std::string> read_lines(const std::string &path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

ConvergenceRecord sample_record() {
  ConvergenceRecord r;
  r.case_id = "family_mu1_nu0";
  r.k = 2;
  r.level = 3;
  r.h = 0.0883883476483184;
  r.ndof = 4352;
  r.nnz = 101376;
  r.err_energy = 1.234567890123e-5;
  r.eoc_energy = 2.987654321;
  r.err_l2u = 3.3e-7;
  r.eoc_l2u = 4.01;
  r.err_l2p = 5.5e-6;
  r.eoc_l2p = std::nullopt;
  r.t_asm_s = 0.25;
  r.t_sol_s = 1.5;
  return r;
}

} // namespace

TEST_CASE("estimated order of convergence") {
  CHECK(*eoc(0.2, 0.1) == doctest::Approx(1.0));
  CHECK(*eoc(4.84e-3, 7.55e-4) == doctest::Approx(2.68).epsilon(0.002));
  CHECK(*eoc(3.7e-2, 3.7e-2) == 0.0);
  CHECK_FALSE(eoc(0.0, 0.1));
  CHECK_FALSE(eoc(0.1, 0.0));
  CHECK_FALSE(eoc(-1.0, 0.1));
  CHECK_FALSE(eoc(std::nan(""), 0.1));
}

TEST_CASE("CSV rows round-trip") {
  const ConvergenceRecord r = sample_record();
  const std::string row = format_csv_row(r);
  CHECK(row.find("e+") == std::string::npos);
  const ConvergenceRecord back = parse_csv_row(row);
  CHECK(back.case_id == r.case_id);
  CHECK(back.k == r.k);
  CHECK(back.level == r.level);
  CHECK(back.h == r.h);
  CHECK(back.ndof == r.ndof);
  CHECK(back.nnz == r.nnz);
  CHECK(back.err_energy == r.err_energy);
  CHECK(*back.eoc_energy == *r.eoc_energy);
  CHECK(back.err_l2u == r.err_l2u);
  CHECK(*back.eoc_l2u == *r.eoc_l2u);
  CHECK(*back.err_l2p == *r.err_l2p);
  CHECK_FALSE(back.eoc_l2p);
  CHECK(back.t_asm_s == r.t_asm_s);
  CHECK(back.t_sol_s == r.t_sol_s);

  ConvergenceRecord first = r;
  first.eoc_energy = first.eoc_l2u = first.eoc_l2p = first.err_l2p = std::nullopt;
  const std::string sparse = format_csv_row(first);
  CHECK(sparse.find(",,") != std::string::npos);
  const ConvergenceRecord sb = parse_csv_row(sparse);
  CHECK_FALSE(sb.eoc_energy);
  CHECK_FALSE(sb.err_l2p);
}

TEST_CASE("malformed CSV rows are rejected") {
  CHECK_THROWS_AS(parse_csv_row("a,1,2"), InvalidInput);
  CHECK_THROWS_AS(parse_csv_row("a,x,0,0.5,1,1,1,,1,,,,0,0"), InvalidInput);
  CHECK_THROWS_AS(parse_csv_row("a,1,0,zz,1,1,1,,1,,,,0,0"), InvalidInput);
  CHECK_THROWS_AS(parse_csv_row("a,1,0,0.5,1,1,,,1,,,,0,0"), InvalidInput);
  ConvergenceRecord bad = sample_record();
  bad.case_id = "a,b";
  CHECK_THROWS_AS(format_csv_row(bad), InvalidInput);
}

TEST_CASE("CSV appender") {
  CHECK(std::string(csv_header) ==
        "case,k,level,h,ndof,nnz,err_energy,eoc_energy,err_l2u,eoc_l2u,err_l2p,eoc_l2p,t_asm_s,t_sol_s");
  const std::string path = temp_path("append.csv");
  {
    CsvAppender csv(path);
    csv.append(sample_record());
  }
  {
    CsvAppender csv(path);
    csv.append(sample_record());
  }
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == csv_header);
  CHECK(lines[1] == lines[2]);

  const std::string other = temp_path("other.csv");
  std::ofstream(other) << "a,b,c\n1,2,3\n";
  CHECK_THROWS_AS(CsvAppender{other}, InvalidInput);
  CHECK_THROWS_AS(CsvAppender{"/nonexistent/dir/out.csv"}, InvalidInput);
  std::filesystem::remove(path);
  std::filesystem::remove(other);
}

TEST_CASE("Darcy convergence over two meshes") {
  ConvergenceOptions options;
  options.k = 1;
  options.levels = 2;
  int calls = 0;
  options.on_level = [&](const ConvergenceRecord &) { ++calls; };
  const auto records = run_convergence(brinkman_family(0.0, 1.0), options);
  REQUIRE(records.size() == 2);
  CHECK(calls == 2);
  CHECK_FALSE(records[0].eoc_energy);
  CHECK(*records[1].eoc_energy >= 1.7);
  CHECK(*records[1].eoc_energy <= 2.3);
  CHECK(records[1].h == doctest::Approx(records[0].h / 2));
  CHECK(records[1].n_elements == 4 * records[0].n_elements);
  CHECK(records[0].cf_min == std::numeric_limits<double>::infinity());
  for (const auto &r : records) {
    CHECK(r.mass_residual < 1e-10);
    CHECK(r.err_l2p);
  }
}

TEST_CASE("Philips records carry no pressure error") {
  ConvergenceOptions options;
  options.k = 0;
  options.levels = 1;
  const auto records = run_convergence(philips_case(), options);
  CHECK_FALSE(records[0].err_l2p);
  const std::string row = format_csv_row(records[0]);
  CHECK(row.find(",,,") != std::string::npos);
}

TEST_CASE("friction diagnostics") {
  ConvergenceOptions options;
  options.k = 1;
  options.levels = 1;
  options.base_n = 1;
  const auto r = run_convergence(brinkman_family(1.0, 1.0), options)[0];
  CHECK(r.n_elements == 8);
  CHECK(r.cf_max == doctest::Approx(r.h * r.h / 2.0));
  const auto s = run_convergence(brinkman_family(1.0, 0.0), options)[0];
  CHECK(s.cf_max == 0.0);
}

TEST_CASE("base mesh from a file is re-tagged with the case regions") {
  const std::string path = temp_path("mesh.txt");
  std::ofstream(path) << "5 4\n-1 -1\n1 -1\n1 1\n-1 1\n0 0\n0 1 4 7\n1 2 4 7\n2 3 4 7\n3 0 4 7\n";
  ConvergenceOptions options;
  options.mesh_file = path;
  const ManufacturedCase kellogg = kellogg_case();
  const Mesh mesh = base_mesh(kellogg, options);
  CHECK(mesh.n_elements() == 4);
  for (std::size_t t = 0; t < mesh.n_elements(); ++t)
    CHECK(mesh.region(t) == quadrant(mesh.centroid(t)));
  options.k = 1;
  options.levels = 2;
  const auto records = run_convergence(kellogg, options);
  CHECK(records.size() == 2);
  CHECK(records[1].n_elements == 16);
  std::filesystem::remove(path);
}

TEST_CASE("invalid study parameters") {
  ConvergenceOptions options;
  options.levels = 0;
  CHECK_THROWS_AS(run_convergence(brinkman_family(1.0, 1.0), options), InvalidInput);
  options.levels = 7;
  CHECK_THROWS_AS(run_convergence(brinkman_family(1.0, 1.0), options), InvalidInput);
  options.levels = 1;
  options.k = 0;
  CHECK_THROWS_AS(run_convergence(brinkman_family(1.0, 1.0), options), InvalidInput);
  options.k = 1;
  options.mesh_file = "/nonexistent/mesh.txt";
  CHECK_THROWS_AS(run_convergence(brinkman_family(1.0, 1.0), options), InvalidInput);
}
