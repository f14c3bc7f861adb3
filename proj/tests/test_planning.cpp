#include <doctest.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "sentmap/eval.hpp"
#include "sentmap/map_io.hpp"
#include "sentmap/planning.hpp"
#include "sentmap/world_sim.hpp"

using namespace sentmap;
using nlohmann::json;

namespace {

const char* kTwoStep =
    R"([{"skill": "goto", "args": ["counter"]}, {"skill": "pick", "args": ["mug"]}])";

Plan expect_two_step(const std::string& reply) {
  Plan plan = parse_plan(reply, default_skill_api());
  REQUIRE(plan.steps.size() == 2);
  CHECK(plan.steps[0].skill == "goto");
  CHECK(plan.steps[0].args == std::vector<std::string>{"counter"});
  CHECK(plan.steps[1].skill == "pick");
  CHECK(plan.steps[1].args == std::vector<std::string>{"mug"});
  return plan;
}

size_t count_skill(const Plan& plan, const std::string& name) {
  size_t n = 0;
  for (const auto& s : plan.steps) {
    if (s.skill == name) ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("planning") {

TEST_CASE("prompt assembly is sectioned and byte-stable") {
  SentMap map = testutil::galley_map();
  SkillApi api = default_skill_api();
  PlannerPrompt prompt = assemble_prompt(map, api, "bring me the mug");
  CHECK(prompt.scene == serialize_map(map));
  CHECK(prompt.query == "bring me the mug");

  std::string text = render_prompt(prompt);
  size_t scene = text.find("## Scene");
  size_t skills = text.find("## Skill API");
  size_t constraints = text.find("## Robot constraints");
  size_t task = text.find("## Task");
  REQUIRE(scene != std::string::npos);
  REQUIRE(skills != std::string::npos);
  REQUIRE(constraints != std::string::npos);
  REQUIRE(task != std::string::npos);
  CHECK(scene < skills);
  CHECK(skills < constraints);
  CHECK(constraints < task);
  CHECK(text.find("bring me the mug") > task);
  CHECK(text.find("goto") != std::string::npos);
  CHECK(render_prompt(prompt) == text);

  CHECK_THROWS_AS(assemble_prompt(map, api, "   "), Error);
}

TEST_CASE("parse_plan digests the zoo of reply formats") {
  // the same two-step plan wrapped every way models actually wrap plans
  std::vector<std::string> wrappers = {
      std::string(kTwoStep),
      "```json\n" + std::string(kTwoStep) + "\n```",
      "```JSON\n" + std::string(kTwoStep) + "\n```",
      "```\n" + std::string(kTwoStep) + "\n```",
      "Here is the plan:\n\n```json\n" + std::string(kTwoStep) + "\n```",
      "```json\n" + std::string(kTwoStep) + "\n```\nLet me know how it goes.",
      "Thinking step by step: the mug is on the bench.\n" +
          std::string(kTwoStep) + "\nDone.",
      "[1, 2, 3] is not a plan, but this is:\n" + std::string(kTwoStep),
      "{\"not\": \"a plan\"}\n" + std::string(kTwoStep),
      "First I go to [the counter]. Then:\n" + std::string(kTwoStep),
      std::string(kTwoStep) + "\n\n" + std::string(kTwoStep),  // first wins
      "  \n\t" + std::string(kTwoStep),
      "```json\n[\n  {\"skill\": \"goto\", \"args\": [\"counter\"]},\n  "
      "{\"skill\": \"pick\", \"args\": [\"mug\"]}\n]\n```",
      R"([{"skill":"goto","args":"counter"},{"skill":"pick","args":"mug"}])",
      R"([{"skill": "goto", "args": ["counter"], "why": "mug is there"},)"
      R"( {"skill": "pick", "args": ["mug"]}])",
  };
  for (const auto& reply : wrappers) {
    CAPTURE(reply);
    expect_two_step(reply);
  }
}

TEST_CASE("parse_plan keeps surrounding prose as rationale") {
  Plan plan = parse_plan("The mug is on the bench.\n```json\n" +
                             std::string(kTwoStep) + "\n```\nEasy.",
                         default_skill_api());
  CHECK(plan.rationale.find("The mug is on the bench.") != std::string::npos);
  CHECK(plan.rationale.find("Easy.") != std::string::npos);
  CHECK(plan.rationale.find("```") == std::string::npos);
}

TEST_CASE("parse_plan coerces non-string arguments to text") {
  Plan plan = parse_plan(R"([{"skill": "goto", "args": [3]}])",
                         default_skill_api());
  CHECK(plan.steps[0].args == std::vector<std::string>{"3"});
}

TEST_CASE("parse_plan rejects what the API does not know") {
  SkillApi api = default_skill_api();

  try {
    parse_plan(R"([{"skill": "teleport", "args": ["counter"]}])", api);
    FAIL("expected UnknownSkill");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::UnknownSkill);
    CHECK(std::string(e.what()).find("teleport") != std::string::npos);
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }

  try {
    parse_plan(R"([{"skill": "goto", "args": ["a", "b"]}])", api);
    FAIL("expected ArityMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::ArityMismatch);
  }

  for (const char* reply :
       {"no plan here", "[]", "[1, 2]", "[{\"args\": []}]", ""}) {
    CAPTURE(reply);
    try {
      parse_plan(reply, api);
      FAIL("expected NoPlanFound");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::NoPlanFound);
    }
  }
}

TEST_CASE("render_plan and parse_plan are inverse on steps") {
  Plan plan;
  plan.steps = {{"goto", {"counter"}}, {"place", {"mug", "bench"}}};
  Plan back = parse_plan(render_plan(plan), default_skill_api());
  CHECK(back.steps == plan.steps);
}

TEST_CASE("plan checkers: full simulation vs structure only") {
  SentMap map = testutil::galley_map();
  SkillApi api = default_skill_api();

  Plan bogus_node;
  bogus_node.steps = {{"goto", {"pantry"}}};
  Plan bogus_object;
  bogus_object.steps = {{"goto", {"counter"}}, {"pick", {"anvil"}}};
  Plan good;
  good.steps = {{"goto", {"counter"}}, {"pick", {"mug"}}};

  PlanChecker full = make_plan_checker(map, "dock", api);
  CHECK(full(good) == std::nullopt);
  REQUIRE(full(bogus_node).has_value());
  CHECK(full(bogus_node)->find("unknown-node") != std::string::npos);
  CHECK(full(bogus_object).has_value());

  PlanChecker shape = make_structural_checker(strip_semantics(map), api);
  CHECK(shape(good) == std::nullopt);
  CHECK(shape(bogus_object) == std::nullopt);  // objects are invisible to it
  REQUIRE(shape(bogus_node).has_value());
  CHECK(shape(bogus_node)->find("pantry") != std::string::npos);
}

TEST_CASE("plan_with_endpoint accepts a clean first reply") {
  SentMap map = testutil::galley_map();
  SkillApi api = default_skill_api();
  PlannerPrompt prompt = assemble_prompt(map, api, "get the mug");

  ReplyScript script({"```json\n" + std::string(kTwoStep) + "\n```"});
  EndpointConfig config = fixture_endpoint_config("test_fm");
  PlanningResult result = plan_with_endpoint(
      prompt, script, config, api, make_plan_checker(map, "dock", api));
  CHECK(result.plan.steps.size() == 2);
  CHECK(result.transcript.size() == 1);
}

TEST_CASE("plan_with_endpoint repairs with the verifier error verbatim") {
  SentMap map = testutil::galley_map();
  SkillApi api = default_skill_api();
  PlannerPrompt prompt = assemble_prompt(map, api, "get the mug");

  std::string bad = R"([{"skill": "goto", "args": ["pantry"]}])";
  ReplyScript script({bad, "```json\n" + std::string(kTwoStep) + "\n```"});
  EndpointConfig config = fixture_endpoint_config("test_fm");
  PlanningResult result = plan_with_endpoint(
      prompt, script, config, api, make_plan_checker(map, "dock", api));
  CHECK(result.plan.steps.size() == 2);
  REQUIRE(result.transcript.size() == 2);

  // the second request must carry the rejected reply and the reason
  json second = json::parse(result.transcript[1].request);
  const auto& messages = second.at("messages");
  REQUIRE(messages.size() == 4);  // system, user, assistant, repair
  CHECK(messages[2].at("role") == "assistant");
  CHECK(messages[2].at("content").get<std::string>().find("pantry") !=
        std::string::npos);
  std::string repair = messages[3].at("content").get<std::string>();
  CHECK(repair.find("rejected") != std::string::npos);
  CHECK(repair.find("unknown-node") != std::string::npos);
}

TEST_CASE("plan_with_endpoint gives up after the repair budget") {
  SentMap map = testutil::galley_map();
  SkillApi api = default_skill_api();
  PlannerPrompt prompt = assemble_prompt(map, api, "get the mug");

  std::string bad = R"([{"skill": "goto", "args": ["pantry"]}])";
  ReplyScript script({bad, bad, bad});
  EndpointConfig config = fixture_endpoint_config("test_fm");
  try {
    plan_with_endpoint(prompt, script, config, api,
                       make_plan_checker(map, "dock", api));
    FAIL("expected PlanRejected");
  } catch (const PlanRejected& e) {
    CHECK(e.kind() == ErrKind::PlanRejected);
    CHECK(e.transcript().size() == 3);
    CHECK(e.last_error().find("unknown-node") != std::string::npos);
  }
}

TEST_CASE("a plan-free decline raises ModelRefusal with the raw reply") {
  SentMap map = testutil::galley_map();
  SkillApi api = default_skill_api();
  PlannerPrompt prompt = assemble_prompt(map, api, "get the mug");

  std::string decline =
      "I'm sorry, but I cannot plan this without knowing where things are.";
  ReplyScript script({decline});
  EndpointConfig config = fixture_endpoint_config("test_fm");
  try {
    plan_with_endpoint(prompt, script, config, api,
                       make_plan_checker(map, "dock", api));
    FAIL("expected ModelRefusal");
  } catch (const ModelRefusal& e) {
    CHECK(e.kind() == ErrKind::ModelRefusal);
    CHECK(e.raw() == decline);
    CHECK(e.transcript().size() == 1);
  }

  CHECK(looks_like_refusal("I CANNOT do that"));
  CHECK_FALSE(looks_like_refusal("here you go"));
}

TEST_CASE("oracle fetches the sponge across the flat") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();
  GoalSpec goal = parse_goal(testutil::fixture("goals/get_sponge.json"));

  Plan plan = oracle_plan(map, goal, "office_desk", api);
  REQUIRE_FALSE(plan.steps.empty());
  CHECK(plan.steps.back().skill == "pick");
  CHECK(plan.steps.back().args == std::vector<std::string>{"sponge"});
  CHECK(plan.steps[plan.steps.size() - 2].args ==
        std::vector<std::string>{"kitchen_sink"});

  // hop-minimal: one goto per hop of the shortest path
  size_t hops = shortest_path(map, "office_desk", "kitchen_sink").size() - 1;
  CHECK(count_skill(plan, "goto") == hops);

  // every goto moves to an adjacent node (single hops, never jumps)
  NodeId at = "office_desk";
  for (const auto& s : plan.steps) {
    if (s.skill != "goto") continue;
    const auto& nbs = map.nodes.at(at).neighbors;
    CHECK(std::find(nbs.begin(), nbs.end(), s.args[0]) != nbs.end());
    at = s.args[0];
  }

  VerifyResult check = verify_plan(map, "office_desk", plan, api);
  CHECK(check.ok);
  CHECK(check_goal(check.final_state, goal, map));
}

TEST_CASE("oracle opens closed containers and leaves them closed") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();
  GoalSpec goal = parse_goal(
      R"({"kind":"object-held","query":{"name":"orange_juice"}})");

  Plan plan = oracle_plan(map, goal, "office_desk", api);
  CHECK(count_skill(plan, "open") == 1);
  CHECK(count_skill(plan, "close") == 1);

  VerifyResult check = verify_plan(map, "office_desk", plan, api);
  REQUIRE(check.ok);
  CHECK(check.final_state.entity_states.at({"kitchen_fridge", "fridge"}) ==
        EntityState::Closed);
  CHECK(check.final_state.is_holding("orange_juice"));
}

TEST_CASE("oracle solves entity-state goals") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();
  GoalSpec goal = parse_goal(
      R"({"kind":"entity-state","node":"kitchen_fridge","entity":"fridge","state":"open"})");

  Plan plan = oracle_plan(map, goal, "office_desk", api);
  CHECK(plan.steps.back().skill == "open");
  VerifyResult check = verify_plan(map, "office_desk", plan, api);
  REQUIRE(check.ok);
  CHECK(check_goal(check.final_state, goal, map));

  GoalSpec impossible = parse_goal(
      R"({"kind":"entity-state","node":"office_desk","entity":"desk","state":"open"})");
  CHECK_THROWS_AS(oracle_plan(map, impossible, "office_desk", api), Error);
}

TEST_CASE("oracle abstains instead of guessing on a stripped map") {
  SentMap map = strip_semantics(parse_map(testutil::fixture("reference.json")));
  SkillApi api = default_skill_api();
  GoalSpec goal = parse_goal(testutil::fixture("goals/get_sponge.json"));
  try {
    oracle_plan(map, goal, "office_desk", api);
    FAIL("expected TargetNotFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::TargetNotFound);
  }
}

TEST_CASE("oracle surfaces ambiguity with the candidate list") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();
  GoalSpec goal =
      parse_goal(R"({"kind":"object-held","query":{"category":"drink"}})");
  try {
    oracle_plan(map, goal, "office_desk", api);
    FAIL("expected AmbiguousTargetError");
  } catch (const AmbiguousTargetError& e) {
    CHECK(e.kind() == ErrKind::AmbiguousTarget);
    CHECK(e.candidates().size() == 4);
  }
}

TEST_CASE("ownership tags disambiguate and their removal re-ambiguates") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();
  GoalSpec goal = parse_goal(
      R"({"kind":"object-given","query":{"category":"drink","owner":"Bob"},"person":"Bob"})");

  Plan plan = oracle_plan(map, goal, "office_desk", api);
  bool picks_iced_tea = false;
  for (const auto& s : plan.steps) {
    if (s.skill == "pick" && s.args[0] == "iced_tea") picks_iced_tea = true;
  }
  CHECK(picks_iced_tea);
  CHECK(plan.steps.back().skill == "give");

  SentMap untagged = strip_ownership(map);
  CHECK_THROWS_AS(oracle_plan(untagged, goal, "office_desk", api),
                  AmbiguousTargetError);
}

TEST_CASE("owner relaxation answers a tagged query on an untagged map") {
  SentMap map =
      strip_ownership(parse_map(testutil::fixture("reference.json")));
  SkillApi api = default_skill_api();
  // only one leftovers-category object exists, so dropping the unmatchable
  // owner leaves a unique target
  GoalSpec goal = parse_goal(
      R"({"kind":"object-at-node","query":{"category":"leftovers","owner":"Bob"},"node":"kitchen_fridge"})");
  Plan plan = oracle_plan(map, goal, "office_desk", api);
  VerifyResult check = verify_plan(map, "office_desk", plan, api);
  REQUIRE(check.ok);
  const Placement& box = check.final_state.object_locations.at("leftovers_box");
  CHECK(box.kind == Placement::Kind::At);
  CHECK(box.node == "kitchen_fridge");
}

TEST_CASE("an owner query delivers every tagged item in turn") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();
  GoalSpec goal = parse_goal(
      R"({"kind":"object-given","query":{"owner":"Bob"},"person":"Alice"})");

  Plan plan = oracle_plan(map, goal, "office_desk", api);
  CHECK(count_skill(plan, "pick") == 2);
  CHECK(count_skill(plan, "give") == 2);

  VerifyResult check = verify_plan(map, "office_desk", plan, api);
  REQUIRE(check.ok);
  CHECK(check_goal(check.final_state, goal, map));

  // but a single gripper cannot *hold* two things at once
  GoalSpec hold_both =
      parse_goal(R"({"kind":"object-held","query":{"owner":"Bob"}})");
  CHECK_THROWS_AS(oracle_plan(map, hold_both, "office_desk", api),
                  AmbiguousTargetError);
}

TEST_CASE("oracle rejects unknown start nodes and unlocatable people") {
  SentMap map = parse_map(testutil::fixture("reference.json"));
  SkillApi api = default_skill_api();
  GoalSpec goal = parse_goal(testutil::fixture("goals/get_sponge.json"));
  CHECK_THROWS_AS(oracle_plan(map, goal, "attic", api), Error);

  GoalSpec to_stranger = parse_goal(
      R"({"kind":"object-given","query":{"name":"sponge"},"person":"Zed"})");
  try {
    oracle_plan(map, to_stranger, "office_desk", api);
    FAIL("expected TargetNotFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::TargetNotFound);
  }
}

}  // TEST_SUITE
