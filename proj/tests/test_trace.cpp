#include <doctest.h>

#include <sstream>

#include "clc/error.hpp"
#include "clc/trace.hpp"

using namespace clc;

namespace {

Trace sample() {
  Trace t;
  t.config = {{"name", "t"}};
  t.seed = 9;
  auto& a = t.add(0.5, RecordKind::block_mined, 3);
  a.a = 1;
  a.b = 0;
  a.c = 1;
  auto& b = t.add(0.1 + 0.2, RecordKind::iteration_halt, 52);
  b.a = 1;
  b.b = 2;
  b.c = -1;
  b.d = 7;
  b.list = {50, 51, 52};
  auto& c = t.add(1.0 / 3.0, RecordKind::delivery, 4);
  c.x = 1e-300;
  return t;
}

ErrorCode read_error(const std::string& s) {
  std::istringstream in(s);
  try {
    read_trace(in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("records round trip exactly") {
  Trace t = sample();
  std::string s = trace_to_string(t);
  std::istringstream in(s);
  Trace r = read_trace(in);
  CHECK(r.seed == 9);
  CHECK(r.config == t.config);
  CHECK(r.records == t.records);
  CHECK(trace_to_string(r) == s);
  CHECK(trace_digest(r) == trace_digest(t));
}

TEST_CASE("kind names and sequence numbers") {
  Trace t = sample();
  CHECK(t.records[2].seq == 2);
  CHECK(to_string(RecordKind::confirm_change) == "confirm-set-change");
  CHECK(record_kind_from("iteration-halt") == RecordKind::iteration_halt);
  CHECK_THROWS_AS(record_kind_from("nope"), Error);
}

TEST_CASE("truncated and tampered traces are rejected") {
  std::string s = trace_to_string(sample());
  auto last = s.rfind('\n', s.size() - 2);
  CHECK(read_error(s.substr(0, last + 1)) == ErrorCode::TruncatedTrace);
  CHECK(read_error("") == ErrorCode::TruncatedTrace);
  // Drop one record line: count mismatch.
  auto first = s.find('\n');
  auto second = s.find('\n', first + 1);
  CHECK(read_error(s.substr(0, first + 1) + s.substr(second + 1)) == ErrorCode::TruncatedTrace);
  // Change a value: digest mismatch.
  std::string m = s;
  auto pos = m.find("\"block\":1");
  REQUIRE(pos != std::string::npos);
  m[pos + 8] = '2';
  CHECK(read_error(m) == ErrorCode::TraceFormat);
  // A partially written line reads as truncation.
  CHECK(read_error(s.substr(0, first + 1) + "{\"t\":0.5,\"se\n") == ErrorCode::TruncatedTrace);
}
