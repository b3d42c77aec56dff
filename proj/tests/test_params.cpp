#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "homog/errors.hpp"
#include "homog/params.hpp"

using namespace homog;

namespace {

const ExtendedParam kInf = ExtendedParam::infinity();

ScalingParams t2(ExtendedParam lambda1) {
  ScalingParams p;
  p.mu0 = ExtendedParam(1.0);
  p.lambda1 = lambda1;
  return p;
}

ScalingParams t3(ExtendedParam mu1, ExtendedParam lambda1) {
  ScalingParams p;
  p.mu0 = ExtendedParam(0.0);
  p.mu1 = mu1;
  p.lambda1 = lambda1;
  p.p_star = ExtendedParam(1.0);
  p.eta0 = ExtendedParam(1.0);
  return p;
}

// Independent decision table keyed on (mu0 > 0, mu1 class, lambda1 class); class 0 = zero, 1 = finite positive, 2 = inf.
RegimeTag table(bool mu0_pos, int mu1_class, int lambda1_class) {
  if (mu0_pos) {
    static const RegimeTag t2tags[3] = {RegimeTag::T2_II_LAM_ZERO, RegimeTag::T2_II_LAM_POS, RegimeTag::T2_I};
    return t2tags[lambda1_class];
  }
  if (mu1_class == 2) {
    static const RegimeTag tags[3] = {RegimeTag::T3_II_LAM_ZERO, RegimeTag::T3_II_LAM_POS, RegimeTag::T3_I};
    return tags[lambda1_class];
  }
  if (lambda1_class == 2) return mu1_class == 1 ? RegimeTag::T3_III_KERNEL : RegimeTag::T3_III_ZERO;
  return RegimeTag::T3_IV;
}

ExtendedParam of_class(int c) { return c == 0 ? ExtendedParam(0.0) : c == 1 ? ExtendedParam(0.7) : kInf; }

}  // namespace

TEST(ExtendedParam, ReciprocalOfInfinityIsZero) {
  EXPECT_EQ(kInf.reciprocal(), 0.0);
  EXPECT_DOUBLE_EQ(ExtendedParam(4.0).reciprocal(), 0.25);
  EXPECT_THROW(ExtendedParam(0.0).reciprocal(), Error);
  EXPECT_THROW(kInf.value(), Error);
}

TEST(ExtendedParam, RejectsNegativeAndParsesTokens) {
  EXPECT_THROW(ExtendedParam(-1.0), ConstraintViolation);
  EXPECT_TRUE(ExtendedParam::parse("inf").is_inf());
  EXPECT_DOUBLE_EQ(ExtendedParam::parse("2.5").value(), 2.5);
  EXPECT_EQ(ExtendedParam::parse(kInf.str()), kInf);
  EXPECT_EQ(ExtendedParam::parse(ExtendedParam(0.125).str()), ExtendedParam(0.125));
  EXPECT_THROW(ExtendedParam::parse("abc"), Error);
}

TEST(ExtendedParam, Classes) {
  EXPECT_TRUE(ExtendedParam(0.0).is_zero());
  EXPECT_FALSE(ExtendedParam(0.0).is_positive());
  EXPECT_TRUE(kInf.is_positive());
  EXPECT_FALSE(kInf.is_finite());
  EXPECT_FALSE(kInf.is_zero());
}

TEST(Classify, T2Cases) {
  EXPECT_EQ(classify_regime(t2(kInf)).tag, RegimeTag::T2_I);
  EXPECT_EQ(classify_regime(t2(ExtendedParam(2.0))).tag, RegimeTag::T2_II_LAM_POS);
  EXPECT_EQ(classify_regime(t2(ExtendedParam(0.0))).tag, RegimeTag::T2_II_LAM_ZERO);
}

TEST(Classify, T3Cases) {
  EXPECT_EQ(classify_regime(t3(kInf, kInf)).tag, RegimeTag::T3_I);
  EXPECT_EQ(classify_regime(t3(kInf, ExtendedParam(1.0))).tag, RegimeTag::T3_II_LAM_POS);
  EXPECT_EQ(classify_regime(t3(kInf, ExtendedParam(0.0))).tag, RegimeTag::T3_II_LAM_ZERO);
  EXPECT_EQ(classify_regime(t3(ExtendedParam(1.0), kInf)).tag, RegimeTag::T3_III_KERNEL);
  EXPECT_EQ(classify_regime(t3(ExtendedParam(0.0), kInf)).tag, RegimeTag::T3_III_ZERO);
  EXPECT_EQ(classify_regime(t3(ExtendedParam(1.0), ExtendedParam(1.0))).tag, RegimeTag::T3_IV);
}

TEST(Classify, ExhaustiveGridPartitionsIntoNineTags) {
  std::set<RegimeTag> seen;
  for (bool mu0_pos : {true, false})
    for (int mu1c = 0; mu1c < 3; ++mu1c)
      for (int lc = 0; lc < 3; ++lc) {
        if (mu0_pos && mu1c != 2) continue;  // mu0 > 0 forces mu1 = inf
        ScalingParams p = mu0_pos ? t2(of_class(lc)) : t3(of_class(mu1c), of_class(lc));
        const RegimeTag got = classify_regime(p).tag;
        EXPECT_EQ(got, table(mu0_pos, mu1c, lc)) << mu0_pos << mu1c << lc;
        seen.insert(got);
      }
  EXPECT_EQ(seen.size(), 9u);
}

TEST(Classify, ConstraintViolations) {
  auto expect_violation = [](ScalingParams p, const std::string& needle) {
    try {
      classify_regime(p);
      ADD_FAILURE() << "no violation for " << needle;
    } catch (const ConstraintViolation& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  ScalingParams p = t2(kInf);
  p.lambda0 = ExtendedParam(1.0);
  expect_violation(p, "lambda0");
  p = t2(kInf);
  p.tau0 = ExtendedParam(2.0);
  expect_violation(p, "tau0");
  p = t2(kInf);
  p.mu0 = kInf;
  expect_violation(p, "mu0");
  p = t2(kInf);
  p.nu0 = kInf;
  expect_violation(p, "nu0");
  p = t2(kInf);
  p.p_star = ExtendedParam(0.0);
  expect_violation(p, "p_star");
  p = t2(kInf);
  p.eta0 = ExtendedParam(0.0);
  expect_violation(p, "eta0");
  p = t2(kInf);
  p.mu1 = ExtendedParam(1.0);
  expect_violation(p, "mu1");
  p = t3(kInf, kInf);
  p.p_star = kInf;
  expect_violation(p, "p_star");
  p = t3(kInf, kInf);
  p.eta0 = kInf;
  expect_violation(p, "eta0");
}

TEST(Classify, RequiredListsFollowPressureFiniteness) {
  ScalingParams p = t2(kInf);
  auto r = classify_regime(p);
  auto has = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  EXPECT_FALSE(has(r.required_cell_problems, kCellMemory));
  EXPECT_TRUE(has(r.required_coefficients, "A_f0"));
  EXPECT_TRUE(has(r.required_coefficients, "q_closure"));
  p.p_star = ExtendedParam(1.0);
  r = classify_regime(p);
  EXPECT_TRUE(has(r.required_cell_problems, kCellMemory));
  EXPECT_FALSE(has(r.required_coefficients, "q_closure"));

  r = classify_regime(t3(ExtendedParam(1.0), ExtendedParam(1.0)));
  EXPECT_EQ(r.required_coefficients, (std::vector<std::string>{"B_pi_kernel", "forcing"}));
  EXPECT_TRUE(classify_regime(t3(kInf, kInf)).required_cell_problems.empty());
}

TEST(Classify, TagStringsRoundTrip) {
  for (auto t : {RegimeTag::T2_I, RegimeTag::T2_II_LAM_POS, RegimeTag::T2_II_LAM_ZERO, RegimeTag::T3_I,
                 RegimeTag::T3_II_LAM_POS, RegimeTag::T3_II_LAM_ZERO, RegimeTag::T3_III_KERNEL,
                 RegimeTag::T3_III_ZERO, RegimeTag::T3_IV})
    EXPECT_EQ(regime_from_string(to_string(t)), t);
  EXPECT_THROW(regime_from_string("T4"), SchemaError);
}

TEST(ScalingLaws, LimitsFromExponents) {
  ScalingLaws laws{{"tau", {1, 0}}, {"nu", {1, 1}}, {"mu", {1, 2}}, {"p", {1, -1}}, {"eta", {3, 0}}, {"lambda", {1, 3}}};
  const ScalingParams p = limits_from_scaling_laws(laws);
  EXPECT_TRUE(p.mu0.is_zero());
  EXPECT_EQ(p.mu1, ExtendedParam(1.0));
  EXPECT_TRUE(p.lambda0.is_zero());
  EXPECT_TRUE(p.lambda1.is_zero());
  EXPECT_TRUE(p.nu0.is_zero());
  EXPECT_TRUE(p.p_star.is_inf());
  EXPECT_EQ(p.eta0, ExtendedParam(3.0));
  EXPECT_EQ(p.tau0, ExtendedParam(1.0));

  laws["mu"] = {1, 0};
  const ScalingParams q = limits_from_scaling_laws(laws);
  EXPECT_EQ(q.mu0, ExtendedParam(1.0));
  EXPECT_TRUE(q.mu1.is_inf());
}

TEST(ScalingLaws, ZeroCoefficientAndErrors) {
  EXPECT_TRUE((ExponentLaw{0.0, -1.0}.limit().is_zero()));
  EXPECT_THROW((ExponentLaw{-1.0, 0.0}.limit()), ConstraintViolation);
  ScalingLaws laws{{"tau", {1, 0}}};
  EXPECT_THROW(limits_from_scaling_laws(laws), ConfigError);
  EXPECT_DOUBLE_EQ((ExponentLaw{2.0, 2.0}.at(0.5)), 0.5);
}

TEST(ScalingParams, RhoHat) {
  ScalingParams p;
  p.rho_f = 1.0;
  p.rho_s = 3.0;
  EXPECT_DOUBLE_EQ(p.rho_hat(0.25), 0.25 * 1.0 + 0.75 * 3.0);
}
