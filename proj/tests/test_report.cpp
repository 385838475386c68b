#include <doctest.h>

#include <string>

#include "dilab/bergman.hpp"
#include "dilab/dilation.hpp"
#include "dilab/report.hpp"
#include "support.hpp"

using namespace dilab;
using nlohmann::json;

namespace {

std::string schema_message(const json& doc) {
  try {
    parse_problem(doc);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Schema) return std::string(e.what()).substr(std::string("Schema: ").size());
    return "wrong code";
  }
  return "no error";
}

json scalar_problem(double re, int m) {
  return json{{"version", "1"}, {"tuple", {{{{re, 0.0}}}}}, {"weights", {m}}};
}

json jordan_problem(double a, int m) {
  return json{{"version", "1"}, {"tuple", {{{{0, 0}, {a, 0}}, {{0, 0}, {0, 0}}}}}, {"weights", {m}}};
}

const IdentityCheck* find(const Report& r, const std::string& name) {
  for (const auto& c : r.identities)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("problem files: values and defaults") {
  const ProblemFile p = parse_problem(jordan_problem(0.5, 2));
  REQUIRE(p.tuple.size() == 1);
  CHECK(p.tuple[0](0, 1) == Complex(0.5, 0.0));
  CHECK(p.tuple[0](1, 0) == Complex(0.0, 0.0));
  CHECK_FALSE(p.truncation.degree.has_value());
  CHECK(p.truncation.epsilon == 1e-9);
  CHECK(p.tolerances.residual == Tolerances{}.residual);

  json d = scalar_problem(0.2, 1);
  d["truncation"] = {{"degree", 17}, {"epsilon", 1e-6}};
  const ProblemFile q = parse_problem(d);
  CHECK(q.truncation.degree == 17);
  CHECK(q.truncation.epsilon == 1e-6);
}

TEST_CASE("problem files: errors carry the offending path") {
  json d = jordan_problem(0.5, 2);
  d["tuple"][0][1][0] = json::array({0.1});
  CHECK(schema_message(d).find("/tuple/0/1/0") == 0);

  d = scalar_problem(0.1, 1);
  d["bogus"] = 1;
  CHECK(schema_message(d).find("/bogus") == 0);

  d = scalar_problem(0.1, 1);
  d["weights"] = {1, 2};
  CHECK(schema_message(d).find("/weights") == 0);

  d = scalar_problem(0.1, 1);
  d["weights"] = {0};
  CHECK(schema_message(d).find("/weights/0") == 0);

  d = scalar_problem(0.1, 1);
  d["truncation"] = {{"degree", "some"}};
  CHECK(schema_message(d).find("/truncation/degree") == 0);

  d = scalar_problem(0.1, 1);
  d.erase("version");
  CHECK(schema_message(d).find("/") == 0);

  d = jordan_problem(0.5, 1);
  d["tuple"].push_back(json::array({json::array({json::array({0, 0})})}));
  d["weights"] = {1, 1};
  CHECK(schema_message(d).find("/tuple/1") == 0);

  d = json{{"version", "1"},
           {"subspace", {{"weights", {1, 1}}, {"degree", 2}, {"monomials", {{0, 3}}}}}};
  CHECK(schema_message(d).find("/subspace/monomials/0/1") == 0);

  d = json{{"version", "1"}, {"subspace", {{"weights", {1}}, {"degree", 2}}}};
  CHECK(schema_message(d).find("/subspace") == 0);
}

TEST_CASE("commands and exit statuses") {
  for (Command c : {Command::Certify, Command::Dilate, Command::Model, Command::Blh, Command::Quotient, Command::Srkh})
    CHECK(parse_command(to_string(c)) == c);
  CHECK_THROWS_AS(parse_command("dilation"), Error);
  CHECK(exit_status_for(ErrorCode::Schema) == kExitInputError);
  CHECK(exit_status_for(ErrorCode::ArityMismatch) == kExitInputError);
  CHECK(exit_status_for(ErrorCode::TailBoundTooLarge) == kExitTruncation);
  CHECK(exit_status_for(ErrorCode::NotBmContraction) == kExitVerdictFalse);
  CHECK(exit_status_for(ErrorCode::NotPSD) == kExitVerdictFalse);
}

TEST_CASE("certify: scalar and Jordan witnesses") {
  const Report ok = run(Command::Certify, parse_problem(scalar_problem(0.5, 2)));
  CHECK(ok.exit_code == kExitPass);
  const IdentityCheck* w = find(ok, "Bm-positivity[1]");
  REQUIRE(w != nullptr);
  CHECK(w->value == doctest::Approx(0.5625).epsilon(1e-14));  // (1 - 1/4)^2

  const Report bad = run(Command::Certify, parse_problem(jordan_problem(0.8, 2)));
  CHECK(bad.exit_code == kExitVerdictFalse);
  w = find(bad, "Bm-positivity[1]");
  REQUIRE(w != nullptr);
  CHECK(w->value == doctest::Approx(1.0 - 2.0 * 0.64).epsilon(1e-12));
  CHECK_FALSE(w->pass);
}

TEST_CASE("dilate: verdicts, truncation budget and degree overrides") {
  json d = scalar_problem(0.6, 2);
  d["truncation"] = {{"degree", "auto"}, {"epsilon", 1e-8}};
  const Report r = run(Command::Dilate, parse_problem(d));
  CHECK(r.exit_code == kExitPass);
  const json& tr = r.details.at("truncation");
  CHECK(tr.at("auto") == true);
  const int n = tr.at("degree");
  CHECK(n == select_degree(OperatorTuple({ComplexMatrix::Constant(1, 1, 0.6)}), Weights{2}, 1e-8));
  CHECK(tr.at("tail_bound").get<double>() <= 1e-8);

  RunOptions fixed;
  fixed.degree = "40";
  const Report r40 = run(Command::Dilate, parse_problem(d), fixed);
  CHECK(r40.details.at("truncation").at("degree") == 40);
  CHECK(r40.details.at("truncation").at("auto") == false);

  RunOptions bad_degree;
  bad_degree.degree = "forty";
  CHECK(run(Command::Dilate, parse_problem(d), bad_degree).exit_code == kExitInputError);

  json slow = scalar_problem(0.999, 1);
  slow["truncation"] = {{"degree", 5}};
  const Report budget = run(Command::Dilate, parse_problem(slow));
  CHECK(budget.exit_code == kExitTruncation);
  CHECK(budget.error_code == std::string("TailBoundTooLarge"));

  const Report nb = run(Command::Dilate, parse_problem(jordan_problem(0.8, 2)));
  CHECK(nb.exit_code == kExitVerdictFalse);

  json unweighted = jordan_problem(0.3, 2);
  unweighted.erase("weights");
  CHECK(run(Command::Dilate, parse_problem(unweighted)).exit_code == kExitInputError);
}

TEST_CASE("reports are deterministic") {
  json d = json{{"version", "1"},
                {"tuple", {{{{0.3, 0.1}, {0.1, 0}}, {{0, 0}, {-0.2, 0}}}, {{{0.2, 0}, {0, 0}}, {{0, 0}, {0.1, 0}}}}},
                {"weights", {2, 1}},
                {"truncation", {{"degree", 10}}}};
  for (Command c : {Command::Certify, Command::Dilate, Command::Model}) {
    const std::string a = run(c, parse_problem(d)).to_json().dump(2);
    const std::string b = run(c, parse_problem(d)).to_json().dump(2);
    CHECK(a == b);
    CHECK(a.find("timing") == std::string::npos);
  }
}

TEST_CASE("model, blh, quotient and srkh pipelines") {
  json pair = json{{"version", "1"},
                   {"tuple", {{{{0.3, 0}, {0, 0}}, {{0, 0}, {-0.2, 0}}}, {{{0.1, 0}, {0, 0}}, {{0, 0}, {0.4, 0}}}}},
                   {"weights", {2, 2}},
                   {"truncation", {{"degree", 12}}}};
  const Report model = run(Command::Model, parse_problem(pair));
  CHECK(model.exit_code == kExitPass);
  CHECK(find(model, "MT-complement") != nullptr);

  json blh = json{{"version", "1"},
                  {"subspace", {{"weights", {2}}, {"degree", 8}, {"monomials", {{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}}}}}};
  CHECK(run(Command::Blh, parse_problem(blh)).exit_code == kExitPass);
  blh["subspace"]["monomials"] = {{0}};
  CHECK(run(Command::Blh, parse_problem(blh)).exit_code == kExitVerdictFalse);

  json q = json{{"version", "1"}, {"subspace", {{"weights", {2, 3}}, {"degree", 6}, {"monomials", {{0, 0}}}}}};
  const Report qr = run(Command::Quotient, parse_problem(q));
  CHECK(qr.exit_code == kExitPass);
  // span{1, z1 + z2} is co-invariant but not doubly commuting
  const TruncatedSpace h(Weights{1, 1}, 3, 1);
  ComplexMatrix f = ComplexMatrix::Zero(h.total_dim(), 2);
  f(0, 0) = 1.0;
  f(h.index({1, 0}, 0), 1) = f(h.index({0, 1}, 0), 1) = 1.0;
  q["subspace"] = {{"weights", {1, 1}}, {"degree", 3}, {"frame", matrix_to_json(f)}};
  CHECK(run(Command::Quotient, parse_problem(q)).exit_code == kExitVerdictFalse);

  json s = json{{"version", "1"},
                {"tuple", {{{{0.4, 0}, {0.3, 0}}, {{0, 0}, {0.2, 0}}}}},
                {"kernel_coeffs", {std::vector<double>(41, 1.0)}}};
  const Report sr = run(Command::Srkh, parse_problem(s));
  CHECK(sr.exit_code == kExitPass);
  CHECK(find(sr, "srkh-isometry") != nullptr);
}

}
