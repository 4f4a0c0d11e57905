#include <doctest.h>

#include "clc/error.hpp"

using namespace clc;

TEST_CASE("error message carries the code name") {
  Error e(ErrorCode::ChainTooShort, "depth 5");
  CHECK(e.code() == ErrorCode::ChainTooShort);
  CHECK(std::string(e.what()) == "ChainTooShort: depth 5");
  CHECK(to_string(ErrorCode::VariantRequired) == std::string("VariantRequired"));
}
