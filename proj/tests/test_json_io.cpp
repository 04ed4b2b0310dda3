#include <gtest/gtest.h>

#include "setsem/json_io.hpp"

using namespace setsem;

namespace {

DomainConfig cfg08() {
  DomainConfig c;
  c.lo = 0;
  c.hi = 8;
  c.tracked_vars = {"x", "y"};
  return c;
}

}  // namespace

TEST(JsonIo, StateRoundTrip) {
  DomainConfig c = cfg08();
  State s = State::canonical(c).with_var(0, 3).with_var(1, 5).with_et(2).with_bt(true);
  json j = state_to_json(c, s);
  EXPECT_EQ(j["h"]["x"], 3);
  EXPECT_EQ(j["e_t"], 2);
  EXPECT_EQ(j["b_t"], true);
  EXPECT_EQ(state_from_json(c, j), s);
  // partial objects fill canonical defaults
  State partial = state_from_json(c, json::parse(R"({"h": {"x": 1}})"));
  EXPECT_EQ(partial.var(0), 1);
  EXPECT_EQ(partial.var(1), c.lo);
  EXPECT_FALSE(partial.bt());
}

TEST(JsonIo, StateRejectsOutOfRange) {
  DomainConfig c = cfg08();
  EXPECT_THROW(state_from_json(c, json::parse(R"({"h": {"x": 99}})")), InputError);
  EXPECT_THROW(state_from_json(c, json::parse(R"({"h": {"zz": 0}})")), InputError);
}

TEST(JsonIo, DvStateForms) {
  DomainConfig c = cfg08();
  State s = State::canonical(c);
  // a plain array is a marker-free vector
  DVState v = dvstate_from_json(c, json::parse(R"([{"h":{"x":0}}])"));
  EXPECT_FALSE(v.diverges);
  EXPECT_EQ(v.entries.size(), 1u);
  // the object form adds the marker
  DVState d = dvstate_from_json(c, json::parse(R"({"entries": [], "diverges": true})"));
  EXPECT_TRUE(d.diverges);
  EXPECT_TRUE(d.entries.empty());
  // serialization picks the matching form
  EXPECT_TRUE(dvstate_to_json(c, dv({s})).is_array());
  EXPECT_TRUE(dvstate_to_json(c, dv({s}, true)).is_object());
  EXPECT_EQ(dvstate_from_json(c, dvstate_to_json(c, dv({s}, true))), dv({s}, true));
}

TEST(JsonIo, ConfigRoundTrip) {
  DomainConfig c = cfg08();
  c.caps.max_vector_len = 5;
  c.caps.step_budget = 123;
  DomainConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.lo, c.lo);
  EXPECT_EQ(back.hi, c.hi);
  EXPECT_EQ(back.tracked_vars, c.tracked_vars);
  EXPECT_EQ(back.caps.max_vector_len, 5u);
  EXPECT_EQ(back.caps.step_budget, 123);
  EXPECT_EQ(config_digest(back), config_digest(c));
}

TEST(JsonIo, PredForms) {
  DomainConfig c = cfg08();
  Pred p1 = pred_from_json(c, json("x == 0"));
  EXPECT_FALSE(p1.is_explicit());
  Pred p2 = pred_from_json(c, json::parse(R"({"formula": "x == 0", "len": 2})"));
  EXPECT_EQ(p2.length, 2u);
  Pred p3 = pred_from_json(c, json::parse(R"({"vectors": [[{"h":{"x":1}}]]})"));
  ASSERT_TRUE(p3.is_explicit());
  EXPECT_EQ(p3.explicit_set->size(), 1u);
  EXPECT_THROW(pred_from_json(c, json::parse("{}")), InputError);
}
