#include <gtest/gtest.h>

#include <string>

#include "fixtures.hpp"
#include "hotrep/profile.hpp"
#include "test_util.hpp"

using namespace hotrep;

namespace {

std::string replace_line(std::string text, const std::string& key, const std::string& line) {
  const auto pos = text.find("\n" + key + " = ");
  const auto end = text.find('\n', pos + 1);
  return text.replace(pos + 1, end - pos - 1, line);
}

void expect_error(const std::string& text, const std::string& fragment) {
  try {
    parse_profile(text, "test.profile");
    FAIL() << "no error for " << fragment;
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Profile, RoundTripIsByteExact) {
  for (const char* name : {"paper-sec5", "paper-fig4"}) {
    const auto p = builtin_profile(name);
    const auto once = serialize_profile(p);
    const auto twice = serialize_profile(parse_profile(once));
    EXPECT_EQ(once, twice);
    EXPECT_EQ(parse_profile(once).values, p.values);
  }
}

TEST(Profile, UnitsConvertToCanonical) {
  std::string text = builtin_profile_text("paper-sec5");
  text = replace_line(text, "J", "J = 1 kHz");
  text = replace_line(text, "T_d", "T_d = 0.0125 us");
  text = replace_line(text, "L0", "L0 = 100000 m");
  const auto p = parse_profile(text);
  EXPECT_DOUBLE_EQ(p.get("J"), 1000.0);
  EXPECT_NEAR(p.get("T_d"), 12.5, 1e-12);
  EXPECT_DOUBLE_EQ(p.get("L0"), 100.0);
  EXPECT_NEAR(p.si("T_d"), 12.5e-9, 1e-21);
  EXPECT_DOUBLE_EQ(p.si("L0"), 100.0);
}

TEST(Profile, LinewidthAliasHalves) {
  const auto p = builtin_profile("paper-sec5");
  EXPECT_DOUBLE_EQ(p.get("gamma_e"), 13.5);
  EXPECT_FALSE(p.has("linewidth_fwhm"));
  expect_error(builtin_profile_text("paper-sec5") + "gamma_e = 13.5 GHz\n", "either gamma_e or linewidth_fwhm");
}

TEST(Profile, Errors) {
  const std::string base = builtin_profile_text("paper-sec5");
  expect_error(base + "colour = 3 1\n", "key 'colour': unknown key");
  expect_error(replace_line(base, "J", "J = 1000"), "key 'J': missing unit");
  expect_error(replace_line(base, "J", "J = 1000 km"), "key 'J': unit 'km'");
  expect_error(base + "J = 10 Hz\n", "key 'J': duplicate");
  expect_error(replace_line(base, "n", "n = 2.5 1"), "key 'n': must be an integer");
  expect_error(replace_line(base, "J", "J = abc Hz"), "key 'J'");
  expect_error(replace_line(base, "J", "# no J"), "missing key 'J'");
  expect_error(replace_line(base, "J", "J 1000 Hz"), "test.profile:");
}

TEST(Profile, ErrorNamesLine) {
  try {
    parse_profile("name = x\nd = 1\n", "p.txt");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("p.txt:2: key 'd'", 0), 0u) << e.what();
  }
}

TEST(Profile, BuiltinsResolveToReferenceValues) {
  const auto rp = resolve(builtin_profile("paper-sec5"));
  EXPECT_LT(testutil::rel(rp.efficiency.eta2, fixtures::eta2), 1e-12);
  EXPECT_LT(testutil::rel(rp.efficiency.eta_s, fixtures::eta_s), 1e-12);
  EXPECT_LT(testutil::rel(rp.cavity.r, fixtures::r), 1e-9);
  EXPECT_NEAR(rp.F_re, 0.986, 1e-9);
  EXPECT_LT(testutil::rel(rp.protocol.t_trans, fixtures::t_trans), 1e-12);
  const auto fig = resolve(builtin_profile("paper-fig4"));
  EXPECT_DOUBLE_EQ(fig.protocol.t_trans, 1.5e-3);
  EXPECT_THROW(builtin_profile("paper-sec9"), ValidationError);
}

TEST(Profile, ZeroDecayGivesPerfectStorage) {
  std::string text = builtin_profile_text("paper-sec5");
  text = replace_line(text, "gamma_s", "gamma_s = 0 Hz");
  text = replace_line(text, "gamma_k", "gamma_k = 0 Hz");
  const auto rp = resolve(parse_profile(text));
  EXPECT_EQ(rp.efficiency.eta2, 1.0);
}

TEST(Profile, ExplicitEfficienciesOverrideDerived) {
  const auto rp = resolve(parse_profile(builtin_profile_text("paper-sec5") + "eta_s = 0.5 1\neta_r = 0.4 1\n"));
  EXPECT_EQ(rp.protocol.eta_s, 0.5);
  EXPECT_EQ(rp.protocol.eta_r, 0.4);
}
