#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "oracles.hpp"
#include "spfc/error.hpp"
#include "spfc/matrix.hpp"
#include "spfc/rng.hpp"

using namespace spfc;
using spfc_test::random_matrix;
using spfc_test::random_vector;
using spfc_test::triple_loop_matmul;

namespace {

std::string temp_path(const char* name) {
  return std::string("spfc_test_") + name;
}

}  // namespace

TEST_CASE("construction validates shape and data length") {
  CHECK_THROWS_AS(DenseMatrix(0, 3), Error);
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), Error);
  DenseMatrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.all_finite());
}

TEST_CASE("matmul identity and hand-checked product") {
  const DenseMatrix b = random_matrix(2, 5, 1);
  CHECK(bitwise_equal(matmul(DenseMatrix::identity(2), b), b));

  const DenseMatrix a(2, 2, {1, 2, 3, 4});
  const DenseMatrix ones(2, 1, {1, 1});
  const DenseMatrix prod = matmul(a, ones);
  CHECK(prod(0, 0) == 3.0);
  CHECK(prod(1, 0) == 7.0);
}

TEST_CASE("matmul matches the triple-loop oracle") {
  const DenseMatrix a = random_matrix(8, 8, 2);
  const DenseMatrix b = random_matrix(8, 8, 3);
  const DenseMatrix fast = matmul(a, b);
  const DenseMatrix slow = triple_loop_matmul(a, b);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(std::abs(fast(i, j) - slow(i, j)) <= 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes naming both") {
  const DenseMatrix a(2, 3);
  const DenseMatrix b(4, 2);
  try {
    matmul(a, b);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x2") != std::string::npos);
  }
}

TEST_CASE("matmul associativity on random triples") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DenseMatrix a = random_matrix(4, 6, seed * 3 + 10);
    const DenseMatrix b = random_matrix(6, 5, seed * 3 + 11);
    const DenseMatrix c = random_matrix(5, 3, seed * 3 + 12);
    const DenseMatrix left = matmul(matmul(a, b), c);
    const DenseMatrix right = matmul(a, matmul(b, c));
    const double scale = frobenius(left);
    for (std::size_t i = 0; i < left.data().size(); ++i)
      CHECK(std::abs(left.data()[i] - right.data()[i]) <= 1e-10 * scale);
  }
}

TEST_CASE("column access") {
  const DenseMatrix i3 = DenseMatrix::identity(3);
  CHECK(column(i3, 1) == std::vector<double>{0, 1, 0});

  const DenseMatrix one_col(3, 1, {5, 6, 7});
  CHECK(column(one_col, 0) == std::vector<double>{5, 6, 7});

  const DenseMatrix m = random_matrix(5, 3, 4);
  const auto col = column(m, 2);
  for (std::size_t i = 0; i < 5; ++i) CHECK(col[i] == m(i, 2));

  CHECK_THROWS_AS(column(m, 3), Error);
}

TEST_CASE("dot, norms, frobenius") {
  CHECK(dot(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK_THROWS_AS(dot(std::vector<double>{1.0}, std::vector<double>{1, 2}),
                  Error);
  CHECK(norm_inf(std::vector<double>{-3, 2}) == 3.0);
  CHECK(norm2(std::vector<double>{3, 4}) == 5.0);
  CHECK(frobenius(DenseMatrix(2, 2, {1, 1, 1, 1})) == 2.0);
}

TEST_CASE("matvec consistent with frobenius bound") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const DenseMatrix m = random_matrix(6, 4, seed + 20);
    const auto v = random_vector(4, seed + 40);
    CHECK(norm2(matvec(m, v)) <= frobenius(m) * norm2(v) * (1 + 1e-12));
  }
}

TEST_CASE("relu zeroes negatives, idempotent, 1-Lipschitz") {
  const DenseMatrix m(1, 2, {-1, 2});
  const DenseMatrix r = relu(m);
  CHECK(r(0, 0) == 0.0);
  CHECK(r(0, 1) == 2.0);

  const DenseMatrix any = random_matrix(4, 4, 5, -2.0, 2.0);
  CHECK(bitwise_equal(relu(relu(any)), relu(any)));

  RngStream rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double a = 4.0 * rng.next_double() - 2.0;
    const double b = 4.0 * rng.next_double() - 2.0;
    CHECK(std::abs(std::max(0.0, a) - std::max(0.0, b)) <=
          std::abs(a - b) + 1e-15);
  }
}

TEST_CASE("mat1 round-trip is bitwise exact") {
  const std::string path = temp_path("roundtrip.mat");
  const DenseMatrix m = random_matrix(7, 5, 6, -10.0, 10.0);
  save_mat1(m, path);
  const DenseMatrix back = load_mat1(path);
  CHECK(bitwise_equal(m, back));
  std::remove(path.c_str());
}

TEST_CASE("mat1 byte layout is pinned") {
  const std::string path = temp_path("layout.mat");
  save_mat1(DenseMatrix(1, 2, {1.0, -2.0}), path);
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const unsigned char expect[] = {
      'M', 'A', 'T', '1', 1, 0, 0, 0, 2, 0, 0, 0,
      0, 0, 0, 0, 0, 0, 0xf0, 0x3f,   // 1.0
      0, 0, 0, 0, 0, 0, 0x00, 0xc0};  // -2.0
  REQUIRE(bytes.size() == sizeof(expect));
  for (std::size_t i = 0; i < sizeof(expect); ++i)
    CHECK(static_cast<unsigned char>(bytes[i]) == expect[i]);
  std::remove(path.c_str());
}

TEST_CASE("mat1 rejects bad magic, truncation, and non-finite entries") {
  const std::string path = temp_path("bad.mat");

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "MATXxxxxxxxxYYY";
  }
  CHECK_THROWS_WITH_AS(load_mat1(path), doctest::Contains("magic"), Error);

  const DenseMatrix m = random_matrix(3, 3, 7);
  save_mat1(m, path);
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() - 5);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  try {
    load_mat1(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();  // names both byte counts
    CHECK(msg.find("84") != std::string::npos);
    CHECK(msg.find("79") != std::string::npos);
  }

  DenseMatrix bad(1, 1);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  save_mat1(bad, path);
  CHECK_THROWS_WITH_AS(load_mat1(path), doctest::Contains("non-finite"),
                       Error);
  std::remove(path.c_str());
}
