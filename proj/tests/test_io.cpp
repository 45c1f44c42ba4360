#include <sstream>

#include <gtest/gtest.h>

#include "cbem/io.hpp"

namespace cbem {
namespace {

TEST(ReadObservations, WhitespaceAndComments) {
  std::istringstream in("# header\n4 4 6\n\t2  3\n\n  # another\n0\n");
  const auto d = read_observations(in, 6);
  EXPECT_EQ(d, Dataset(6, {4, 4, 6, 2, 3, 0}));
}

TEST(ReadObservations, ParseErrorNamesLine) {
  std::istringstream in("1 2\n3 x4\n");
  try {
    read_observations(in, 6);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ReadObservations, OutOfRangeNamesValue) {
  std::istringstream in("1 2\n9\n");
  try {
    read_observations(in, 6);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("9"), std::string::npos);
  }
  std::istringstream neg("-1\n");
  EXPECT_THROW(read_observations(neg, 6), DataError);
  std::istringstream frac("2.5\n");
  EXPECT_THROW(read_observations(frac, 6), DataError);
}

TEST(ReadObservations, EmptyFile) {
  std::istringstream in("# nothing\n");
  EXPECT_THROW(read_observations(in, 6), DataError);
}

TEST(ReadObservations, RoundTripsWrittenSample) {
  const auto d = sample({9, 0.35, 0.4}, 50, 31);
  std::stringstream buf;
  write_observations(buf, d, "CB(9, 0.35, 0.4)");
  EXPECT_EQ(read_observations(buf, 9), d);
}

TEST(ReadEstimates, OnePerLine) {
  std::istringstream in("0.5\n# c\n0.25\n\n1e-3\n");
  EXPECT_EQ(read_estimates(in), (std::vector<double>{0.5, 0.25, 1e-3}));
  std::istringstream bad("0.5 0.6\n");
  EXPECT_THROW(read_estimates(bad), DataError);
}

TEST(WriteEstimates, ShortestRoundTrip) {
  const std::vector<double> v = {0.1, 1.0 / 3.0, 0.58694116269525894};
  std::stringstream buf;
  write_estimates(buf, v);
  EXPECT_EQ(read_estimates(buf), v);
}

} // namespace
} // namespace cbem
