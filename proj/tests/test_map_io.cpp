#include <doctest.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "sentmap/map_io.hpp"

using namespace sentmap;
using nlohmann::json;

namespace {

bool has_issue(const ValidationReport& report, Severity severity,
               const std::string& path_part, const std::string& msg_part) {
  for (const auto& issue : report.issues) {
    if (issue.severity == severity &&
        issue.path.find(path_part) != std::string::npos &&
        issue.message.find(msg_part) != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST_SUITE("map_io") {

TEST_CASE("canonical serialization is a fixpoint") {
  std::string doc = testutil::fixture("reference.json");
  SentMap map = parse_map(doc);
  std::string once = serialize_map(map);
  CHECK(once == doc);  // the fixture is written canonically
  CHECK(serialize_map(parse_map(once)) == once);
  CHECK(parse_map(once) == map);
}

TEST_CASE("galley map round-trips structurally") {
  SentMap map = testutil::galley_map();
  SentMap back = parse_map(serialize_map(map));
  CHECK(back == map);
}

TEST_CASE("malformed JSON reports the byte position") {
  try {
    parse_map("{\"version\": \"1\", ");
    FAIL("expected MalformedJson");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::MalformedJson);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("validate_map never throws and pins errors to json paths") {
  SUBCASE("not JSON at all") {
    ValidationReport report = validate_map("not json {");
    CHECK_FALSE(report.ok());
  }

  SUBCASE("dangling edge") {
    json doc = {{"version", "1"},
                {"nodes",
                 {{"a", {{"zone", "z"}, {"neighbors", {"ghost"}}}}}}};
    ValidationReport report = validate_map(doc.dump());
    CHECK(has_issue(report, Severity::Error, "/nodes/a/neighbors/0", "ghost"));
  }

  SUBCASE("self loop") {
    json doc = {{"version", "1"},
                {"nodes", {{"a", {{"zone", "z"}, {"neighbors", {"a"}}}}}}};
    ValidationReport report = validate_map(doc.dump());
    CHECK(has_issue(report, Severity::Error, "/nodes/a/neighbors/0", ""));
  }

  SUBCASE("stateful entity that cannot be opened") {
    json doc = {
        {"version", "1"},
        {"nodes",
         {{"a",
           {{"zone", "z"},
            {"semantic",
             {{"label", "spot"},
              {"entities",
               {{{"name", "box"}, {"kind", "box"}, {"state", "closed"}}}}}}}}}}};
    ValidationReport report = validate_map(doc.dump());
    CHECK(has_issue(report, Severity::Error,
                    "/nodes/a/semantic/entities/0/state", ""));
  }

  SUBCASE("owner nobody declared") {
    json doc = {
        {"version", "1"},
        {"nodes",
         {{"a",
           {{"zone", "z"},
            {"semantic",
             {{"label", "spot"},
              {"entities",
               {{{"name", "shelf"},
                 {"kind", "shelf"},
                 {"objects",
                  {{{"name", "pen"},
                    {"category", "pen"},
                    {"owner", "Zed"}}}}}}}}}}}}}};
    ValidationReport report = validate_map(doc.dump());
    CHECK(has_issue(report, Severity::Error,
                    "/nodes/a/semantic/entities/0/objects/0/owner", "Zed"));
  }

  SUBCASE("unreachable node is a warning, not an error") {
    json doc = {{"version", "1"},
                {"nodes",
                 {{"a", {{"zone", "z"}, {"neighbors", {"b"}}}},
                  {"b", {{"zone", "z"}, {"neighbors", {"a"}}}},
                  {"c", {{"zone", "z"}}}}}};
    ValidationReport report = validate_map(doc.dump());
    CHECK(report.ok());
    CHECK(report.warning_count() >= 1);
    CHECK(has_issue(report, Severity::Warning, "/nodes/c", ""));
  }

  SUBCASE("wrong version") {
    ValidationReport report =
        validate_map(json({{"version", "2"}, {"nodes", json::object()}}).dump());
    CHECK(has_issue(report, Severity::Error, "/version", ""));
  }
}

TEST_CASE("json pointer escaping follows rfc 6901") {
  CHECK(json_path_escape("plain") == "plain");
  CHECK(json_path_escape("a/b") == "a~1b");
  CHECK(json_path_escape("a~b") == "a~0b");
  CHECK(json_path_escape("~/") == "~0~1");
}

TEST_CASE("report renders as text and json") {
  json doc = {{"version", "1"},
              {"nodes", {{"a", {{"zone", "z"}, {"neighbors", {"ghost"}}}}}}};
  ValidationReport report = validate_map(doc.dump());
  std::string text = report.to_text();
  CHECK(text.find("error") != std::string::npos);
  CHECK(text.find("/nodes/a/neighbors/0") != std::string::npos);

  json parsed = json::parse(report.to_json());
  REQUIRE(parsed.contains("issues"));
  CHECK(parsed["issues"].size() == report.issues.size());
}

TEST_CASE("unknown fields survive a round trip in attributes") {
  json doc = {
      {"version", "1"},
      {"vendor_note", "keep me"},
      {"nodes",
       {{"a",
         {{"zone", "z"},
          {"color", "teal"},
          {"semantic",
           {{"label", "spot"},
            {"entities",
             {{{"name", "shelf"},
               {"kind", "shelf"},
               {"height_cm", 120},
               {"objects",
                {{{"name", "pen"},
                  {"category", "pen"},
                  {"weight", {{"g", 12}}}}}}}}}}}}}}}};
  SentMap map = parse_map(doc.dump());
  CHECK(map.attributes.at("vendor_note") == "keep me");
  CHECK(map.nodes.at("a").attributes.at("color") == "teal");
  const Entity& shelf = map.nodes.at("a").semantic->entities[0];
  CHECK(shelf.attributes.at("height_cm") == "120");
  CHECK(shelf.objects[0].attributes.at("weight") == "{\"g\":12}");

  // and they come back out
  std::string out = serialize_map(map);
  CHECK(out.find("vendor_note") != std::string::npos);
  CHECK(out.find("teal") != std::string::npos);
  CHECK(parse_map(out) == map);
}

TEST_CASE("payload documents parse and serialize standalone") {
  SentMap map = testutil::galley_map();
  const SemanticPayload& payload = *map.nodes.at("cold_store").semantic;
  std::string doc = serialize_payload(payload);
  CHECK(parse_payload(doc) == payload);

  SUBCASE("schema problems carry the report") {
    json bad = {{"label", "x"},
                {"entities",
                 {{{"name", "box"}, {"kind", "box"}, {"state", "closed"}}}}};
    try {
      parse_payload(bad.dump());
      FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
      CHECK_FALSE(e.report().ok());
    }
  }

  SUBCASE("not json") {
    CHECK_THROWS_AS(parse_payload("nope"), Error);
  }
}

TEST_CASE("apply_edit covers every operation") {
  SentMap map = testutil::galley_map();

  EditCommand add;
  add.op = EditOp::AddObject;
  add.node = "counter";
  add.entity = "bench";
  add.value = json({{"name", "fork"}, {"category", "cutlery"}}).dump();
  map = apply_edit(std::move(map), add);
  ObjectQuery q;
  q.name = "fork";
  CHECK(find_object(map, q).size() == 1);

  EditCommand own;
  own.op = EditOp::SetOwner;
  own.node = "counter";
  own.entity = "bench";
  own.object = "fork";
  own.value = "\"Dana\"";
  map = apply_edit(std::move(map), own);
  CHECK(*find_object(map, q)[0].object.owner == "Dana");

  own.value = "null";  // clears
  map = apply_edit(std::move(map), own);
  CHECK_FALSE(find_object(map, q)[0].object.owner.has_value());

  EditCommand state;
  state.op = EditOp::SetEntityState;
  state.node = "cold_store";
  state.entity = "fridge";
  state.value = "\"open\"";
  map = apply_edit(std::move(map), state);
  CHECK(map.nodes.at("cold_store").semantic->entities[0].state ==
        EntityState::Open);

  EditCommand label;
  label.op = EditOp::RenameLabel;
  label.node = "counter";
  label.value = "\"service counter\"";
  map = apply_edit(std::move(map), label);
  CHECK(map.nodes.at("counter").semantic->label == "service counter");

  EditCommand desc;
  desc.op = EditOp::SetDescription;
  desc.node = "counter";
  desc.value = "\"stainless bench by the door\"";
  map = apply_edit(std::move(map), desc);
  CHECK(*map.nodes.at("counter").semantic->description ==
        "stainless bench by the door");

  EditCommand person;
  person.op = EditOp::AddPerson;
  person.value = json({{"name", "Eli"}, {"location", "dock"}}).dump();
  map = apply_edit(std::move(map), person);
  REQUIRE(map.find_person("Eli") != nullptr);
  CHECK(*map.find_person("Eli")->location == "dock");

  EditCommand relocate;
  relocate.op = EditOp::SetPersonLocation;
  relocate.person = "Eli";
  relocate.value = "\"counter\"";
  map = apply_edit(std::move(map), relocate);
  CHECK(*map.find_person("Eli")->location == "counter");

  EditCommand remove;
  remove.op = EditOp::RemoveObject;
  remove.node = "counter";
  remove.entity = "bench";
  remove.object = "fork";
  map = apply_edit(std::move(map), remove);
  CHECK(find_object(map, q).empty());
}

TEST_CASE("apply_edit refuses targets that do not resolve") {
  SentMap map = testutil::galley_map();
  EditCommand cmd;
  cmd.op = EditOp::RemoveObject;
  cmd.node = "counter";
  cmd.entity = "bench";
  cmd.object = "anvil";
  try {
    apply_edit(std::move(map), cmd);
    FAIL("expected UnknownTarget");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::UnknownTarget);
  }
}

TEST_CASE("an edit that would corrupt the map is rejected with a path") {
  SentMap map = testutil::galley_map();
  EditCommand cmd;
  cmd.op = EditOp::SetOwner;
  cmd.node = "counter";
  cmd.entity = "bench";
  cmd.object = "mug";
  cmd.value = "\"Carol\"";  // nobody named Carol in this map
  try {
    apply_edit(std::move(map), cmd);
    FAIL("expected InvariantBroken");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::InvariantBroken);
    CHECK(std::string(e.what()).find("/nodes/counter") != std::string::npos);
  }
}

TEST_CASE("edit command wire form round trips") {
  std::string doc = testutil::fixture("enrichment_edits.json");
  std::vector<EditCommand> cmds = parse_edit_commands(doc);
  REQUIRE(cmds.size() == 4);
  CHECK(cmds[0].op == EditOp::AddPerson);
  CHECK(cmds[2].op == EditOp::SetOwner);
  CHECK(cmds[2].object == "iced_tea");
  CHECK(parse_edit_commands(serialize_edit_commands(cmds)) == cmds);

  CHECK_THROWS_AS(parse_edit_commands("{\"op\": \"set-owner\"}"), Error);
  CHECK_THROWS_AS(parse_edit_commands("[{\"op\": \"levitate\"}]"), Error);
}

}  // TEST_SUITE
