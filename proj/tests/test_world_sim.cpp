#include <doctest.h>

#include <nlohmann/json.hpp>

#include <random>

#include "helpers.hpp"
#include "sentmap/map_io.hpp"
#include "sentmap/world_sim.hpp"

using namespace sentmap;
using nlohmann::json;

namespace {

SkillCall call(const char* skill, std::vector<std::string> args) {
  SkillCall c;
  c.skill = skill;
  c.args = std::move(args);
  return c;
}

struct Rig {
  SentMap map = testutil::galley_map();
  SkillApi api = default_skill_api();
  WorldState state;

  explicit Rig(const NodeId& start = "dock") {
    state = initial_state(map, start);
  }

  StepOutcome run(const SkillCall& c) { return step(map, state, c, api); }

  // runs and asserts success, advancing the rig's state
  void ok(const SkillCall& c) {
    StepOutcome outcome = run(c);
    REQUIRE_MESSAGE(outcome.ok, (outcome.error ? outcome.error->to_text()
                                               : std::string("?")));
    state = outcome.state_after;
  }

  StepErrKind fails(const SkillCall& c) {
    StepOutcome outcome = run(c);
    REQUIRE_FALSE(outcome.ok);
    // a failed step must not move the world
    CHECK(outcome.state_after == state);
    return outcome.error->kind;
  }
};

}  // namespace

TEST_SUITE("world_sim") {

TEST_CASE("initial_state copies the map's facts") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  WorldState state = initial_state(map, "office_desk");
  CHECK(state.robot_at == "office_desk");
  CHECK(state.holding.empty());
  CHECK(state.object_locations.size() == 23);
  CHECK(state.entity_states.at({"kitchen_fridge", "fridge"}) ==
        EntityState::Closed);

  const Placement& sponge = state.object_locations.at("sponge");
  CHECK(sponge.kind == Placement::Kind::At);
  CHECK(sponge.node == "kitchen_sink");
  CHECK(sponge.entity == "sink_counter");

  CHECK_THROWS_AS(initial_state(map, "attic"), Error);
}

TEST_CASE("initial_state refuses colliding object names") {
  SentMap map = testutil::galley_map();
  EditCommand dup;
  dup.op = EditOp::AddObject;
  dup.node = "cold_store";
  dup.entity = "fridge";
  dup.value = json({{"name", "mug"}, {"category", "cup"}}).dump();
  map = apply_edit(std::move(map), dup);  // validation only warns
  try {
    initial_state(map, "dock");
    FAIL("expected DuplicateObjectName");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::DuplicateObjectName);
    CHECK(std::string(e.what()).find("mug") != std::string::npos);
  }
}

TEST_CASE("goto expands multi-hop routes and rejects unknown targets") {
  Rig rig;
  rig.ok(call("goto", {"cold_store"}));  // dock -> counter -> cold_store
  CHECK(rig.state.robot_at == "cold_store");

  CHECK(rig.fails(call("goto", {"attic"})) == StepErrKind::UnknownNode);

  SentMap island_map = testutil::galley_map();
  NavNode island;
  island.id = "island";
  island.zone = "bay";
  island_map = add_nav_node(std::move(island_map), island);
  WorldState s = initial_state(island_map, "dock");
  StepOutcome out = step(island_map, s, call("goto", {"island"}),
                         default_skill_api());
  REQUIRE_FALSE(out.ok);
  CHECK(out.error->kind == StepErrKind::NotAdjacentPath);
}

TEST_CASE("pick checks its preconditions in a fixed order") {
  Rig rig;

  CHECK(rig.fails(call("pick", {"anvil"})) == StepErrKind::UnknownObject);
  CHECK(rig.fails(call("pick", {"mug"})) == StepErrKind::ObjectNotHere);

  rig.ok(call("goto", {"cold_store"}));
  CHECK(rig.fails(call("pick", {"juice"})) == StepErrKind::ContainerClosed);
  rig.ok(call("open", {"fridge"}));
  rig.ok(call("pick", {"juice"}));
  CHECK(rig.state.is_holding("juice"));
  CHECK(rig.state.object_locations.at("juice").kind == Placement::Kind::Held);

  rig.ok(call("goto", {"counter"}));
  CHECK(rig.fails(call("pick", {"mug"})) == StepErrKind::GripperOccupied);
}

TEST_CASE("place requires presence, a held item, and an affording surface") {
  Rig rig;
  CHECK(rig.fails(call("place", {"anvil", "bench"})) ==
        StepErrKind::UnknownObject);
  CHECK(rig.fails(call("place", {"mug", "bench"})) ==
        StepErrKind::GripperEmpty);  // known object, empty gripper

  rig.ok(call("goto", {"counter"}));
  rig.ok(call("pick", {"mug"}));
  CHECK(rig.fails(call("place", {"mug", "altar"})) ==
        StepErrKind::UnknownEntity);

  rig.ok(call("goto", {"cold_store"}));
  CHECK(rig.fails(call("place", {"mug", "fridge"})) ==
        StepErrKind::ContainerClosed);
  rig.ok(call("open", {"fridge"}));
  rig.ok(call("place", {"mug", "fridge"}));
  CHECK_FALSE(rig.state.is_holding("mug"));
  const Placement& mug = rig.state.object_locations.at("mug");
  CHECK(mug.kind == Placement::Kind::At);
  CHECK(mug.node == "cold_store");
  CHECK(mug.entity == "fridge");
}

TEST_CASE("open and close toggle stateful entities only") {
  Rig rig;
  rig.ok(call("goto", {"cold_store"}));
  rig.ok(call("open", {"fridge"}));
  CHECK(rig.state.entity_states.at({"cold_store", "fridge"}) ==
        EntityState::Open);
  rig.ok(call("open", {"fridge"}));  // idempotent
  rig.ok(call("close", {"fridge"}));
  CHECK(rig.state.entity_states.at({"cold_store", "fridge"}) ==
        EntityState::Closed);

  rig.ok(call("goto", {"counter"}));
  CHECK(rig.fails(call("open", {"bench"})) == StepErrKind::NoAffordance);
  CHECK(rig.fails(call("open", {"fridge"})) == StepErrKind::UnknownEntity);
}

TEST_CASE("give hands the held object to a co-located person") {
  Rig rig;
  rig.ok(call("goto", {"counter"}));
  rig.ok(call("pick", {"spoon"}));

  CHECK(rig.fails(call("give", {"spoon", "Zed"})) ==
        StepErrKind::UnknownPerson);

  rig.ok(call("give", {"spoon", "Dana"}));
  const Placement& spoon = rig.state.object_locations.at("spoon");
  CHECK(spoon.kind == Placement::Kind::GivenTo);
  CHECK(spoon.person == "Dana");
  CHECK(rig.state.holding.empty());
}

TEST_CASE("give fails when the person is elsewhere") {
  Rig rig;
  rig.ok(call("goto", {"counter"}));
  rig.ok(call("pick", {"spoon"}));
  rig.ok(call("goto", {"dock"}));
  CHECK(rig.fails(call("give", {"spoon", "Dana"})) ==
        StepErrKind::PersonNotHere);
}

TEST_CASE("unknown skills and wrong arities are plan-level rejections") {
  Rig rig;
  CHECK(rig.fails(call("teleport", {"dock"})) == StepErrKind::UnknownSkill);
  CHECK(rig.fails(call("goto", {"dock", "counter"})) ==
        StepErrKind::ArityMismatch);
  CHECK(rig.fails(call("goto", {})) == StepErrKind::ArityMismatch);
}

TEST_CASE("step outcomes export as one JSON line each") {
  Rig rig;
  StepOutcome outcome = rig.run(call("goto", {"counter"}));
  std::string line = outcome.to_json_line();
  CHECK(line.find('\n') == std::string::npos);
  json j = json::parse(line);
  CHECK(j["ok"] == true);
  CHECK(j["state_after"]["robot_at"] == "counter");
}

TEST_CASE("verify_plan stops at the first failing step") {
  SentMap map = testutil::galley_map();
  Plan plan;
  plan.steps = {call("goto", {"counter"}), call("pick", {"anvil"}),
                call("pick", {"mug"})};
  VerifyResult result = verify_plan(map, "dock", plan, default_skill_api());
  CHECK_FALSE(result.ok);
  CHECK(result.failed_step == 1);
  CHECK(result.error->kind == StepErrKind::UnknownObject);
  CHECK(result.trace.size() == 2);  // the success and the failure
  CHECK(result.verdict_text().find("step 1") != std::string::npos);

  Plan empty;
  CHECK(verify_plan(map, "dock", empty, default_skill_api()).ok);
}

TEST_CASE("check_goal covers all four goal kinds") {
  SentMap map = testutil::galley_map();
  SkillApi api = default_skill_api();

  Plan fetch;
  fetch.steps = {call("goto", {"counter"}), call("pick", {"mug"})};
  VerifyResult r = verify_plan(map, "dock", fetch, api);
  REQUIRE(r.ok);

  GoalSpec held = parse_goal(R"({"kind":"object-held","query":{"name":"mug"}})");
  CHECK(check_goal(r.final_state, held, map));

  GoalSpec other =
      parse_goal(R"({"kind":"object-held","query":{"name":"spoon"}})");
  CHECK_FALSE(check_goal(r.final_state, other, map));

  GoalSpec at = parse_goal(
      R"({"kind":"object-at-node","query":{"name":"spoon"},"node":"counter"})");
  CHECK(check_goal(r.final_state, at, map));

  Plan deliver = fetch;
  deliver.steps.push_back(call("give", {"mug", "Dana"}));
  r = verify_plan(map, "dock", deliver, api);
  REQUIRE(r.ok);
  GoalSpec given = parse_goal(
      R"({"kind":"object-given","query":{"name":"mug"},"person":"Dana"})");
  CHECK(check_goal(r.final_state, given, map));

  GoalSpec fridge_open = parse_goal(
      R"({"kind":"entity-state","node":"cold_store","entity":"fridge","state":"open"})");
  CHECK_FALSE(check_goal(r.final_state, fridge_open, map));

  GoalSpec unresolvable =
      parse_goal(R"({"kind":"object-held","query":{"name":"anvil"}})");
  CHECK_THROWS_AS(check_goal(r.final_state, unresolvable, map), Error);
}

TEST_CASE("a goal over several matches requires all of them to land") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();

  Plan one;
  one.steps = {call("goto", {"lounge_table"}), call("pick", {"iced_tea"}),
               call("goto", {"lounge_sofa"}), call("give", {"iced_tea", "Bob"})};
  VerifyResult r = verify_plan(map, "office_desk", one, api);
  REQUIRE(r.ok);

  GoalSpec all_of_bobs = parse_goal(
      R"({"kind":"object-given","query":{"owner":"Bob"},"person":"Bob"})");
  CHECK_FALSE(check_goal(r.final_state, all_of_bobs, map));  // leftovers_box remains

  Plan both = one;
  both.steps.push_back(call("goto", {"lounge_table"}));
  both.steps.push_back(call("pick", {"leftovers_box"}));
  both.steps.push_back(call("goto", {"lounge_sofa"}));
  both.steps.push_back(call("give", {"leftovers_box", "Bob"}));
  r = verify_plan(map, "office_desk", both, api);
  REQUIRE(r.ok);
  CHECK(check_goal(r.final_state, all_of_bobs, map));
}

TEST_CASE("object count is conserved through a long random walk") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();
  WorldState state = initial_state(map, "office_desk");

  std::mt19937 rng(7);
  std::vector<std::string> nodes;
  for (const auto& [id, n] : map.nodes) nodes.push_back(id);
  std::vector<std::string> objects;
  for (const auto& [name, p] : state.object_locations) objects.push_back(name);

  std::uniform_int_distribution<size_t> skill_pick(0, 5);
  std::uniform_int_distribution<size_t> node_pick(0, nodes.size() - 1);
  std::uniform_int_distribution<size_t> obj_pick(0, objects.size() - 1);

  int accepted = 0;
  for (int i = 0; i < 2000; ++i) {
    SkillCall c;
    switch (skill_pick(rng)) {
      case 0: c = call("goto", {nodes[node_pick(rng)]}); break;
      case 1: c = call("pick", {objects[obj_pick(rng)]}); break;
      case 2: c = call("place", {objects[obj_pick(rng)], "sink_counter"}); break;
      case 3: c = call("open", {"fridge"}); break;
      case 4: c = call("close", {"fridge"}); break;
      default: c = call("give", {objects[obj_pick(rng)], "Bob"}); break;
    }
    StepOutcome out = step(map, state, c, api);
    if (out.ok) {
      ++accepted;
      state = out.state_after;
    } else {
      REQUIRE(out.state_after == state);
    }
    REQUIRE(state.object_locations.size() == 23);
    REQUIRE(state.holding.size() <= 1);
  }
  CHECK(accepted > 0);
}

}  // TEST_SUITE
