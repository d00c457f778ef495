#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "opsynth/errors.hpp"
#include "opsynth/fock_io.hpp"

namespace opsynth {
namespace {

Eigen::MatrixXcd sample_matrix() { return make_test_state(TestStateSpec::random(3), 3).entries(); }

TEST(FockIo, JsonRoundTripIsExact) {
  const Eigen::MatrixXcd m = sample_matrix();
  const auto doc = matrix_to_json(m);
  EXPECT_EQ(doc.at("cutoff").get<int>(), 3);
  EXPECT_EQ(matrix_from_json(nlohmann::json::parse(doc.dump())), m);
}

TEST(FockIo, JsonRejectsUnknownKeysAndRaggedRows) {
  auto doc = matrix_to_json(sample_matrix());
  doc["extra"] = 1;
  EXPECT_THROW(matrix_from_json(doc), Error);
  auto ragged = matrix_to_json(sample_matrix());
  ragged["re"][1].erase(0);
  EXPECT_THROW(matrix_from_json(ragged), Error);
}

TEST(FockIo, CsvRoundTripIsExact) {
  const Eigen::MatrixXcd m = sample_matrix();
  const std::string csv = matrix_to_csv(m);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "m,n,re,im");
  EXPECT_EQ(matrix_from_csv(csv), m);
}

TEST(FockIo, CsvRejectsMissingOrRepeatedEntries) {
  EXPECT_THROW(matrix_from_csv("m,n,re,im\n0,0,1,0\n0,1,0,0\n1,1,0,0\n"), Error);
  EXPECT_THROW(matrix_from_csv("m,n,re,im\n0,0,1,0\n0,0,1,0\n"), Error);
  EXPECT_THROW(matrix_from_csv("a,b\n"), Error);
}

TEST(FockIo, DensityFromJsonValidates) {
  const auto rho = make_test_state(TestStateSpec::fock(1), 2);
  EXPECT_EQ(density_from_json(to_json(rho)).entries(), rho.entries());
  auto bad = to_json(rho);
  bad["im"][0][1] = 0.3;
  EXPECT_THROW(density_from_json(bad), Error);
}

TEST(FockIo, NullMarksUnmeasuredEntry) {
  Eigen::MatrixXcd m = sample_matrix();
  m(1, 0) = Complex(std::nan(""), std::nan(""));
  const auto back = matrix_from_json(matrix_to_json(m));
  EXPECT_TRUE(std::isnan(back(1, 0).real()));
  EXPECT_EQ(back(0, 0), m(0, 0));
  EXPECT_THROW(density_from_json(matrix_to_json(m)), Error);
}

TEST(FockIo, AtomicWriteAndReadByExtension) {
  const auto dir = std::filesystem::temp_directory_path() / "opsynth_fock_io_test";
  std::filesystem::create_directories(dir);
  const Eigen::MatrixXcd m = sample_matrix();
  write_file_atomically((dir / "m.json").string(), matrix_to_json(m).dump());
  write_file_atomically((dir / "m.csv").string(), matrix_to_csv(m));
  EXPECT_EQ(read_matrix_file((dir / "m.json").string()), m);
  EXPECT_EQ(read_matrix_file((dir / "m.csv").string()), m);
  EXPECT_THROW(read_matrix_file((dir / "missing.json").string()), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace opsynth
