// Regenerates the bundled fixture tree from the reference environment.
// Everything under fixtures/ is derived; edit this tool, not the files.
//
//   gen_fixtures [fixtures-dir]
//
// The generator cross-checks itself: building a map from the emitted
// walkthrough trace + describer payloads and applying the enrichment
// edits must reproduce reference.json byte-for-byte.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "sentmap/builder.hpp"
#include "sentmap/core.hpp"
#include "sentmap/endpoint.hpp"
#include "sentmap/eval.hpp"
#include "sentmap/map_io.hpp"
#include "sentmap/planning.hpp"
#include "sentmap/skills.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace sentmap;

namespace {

int files_written = 0;

void put(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    std::exit(1);
  }
  out << content;
  ++files_written;
}

TraceEvent move_to(const std::string& node, const std::string& zone) {
  TraceEvent e;
  e.kind = TraceEvent::Kind::MoveTo;
  e.node = node;
  e.zone = zone;
  return e;
}

TraceEvent snapshot(const std::string& node, const std::string& hint) {
  TraceEvent e;
  e.kind = TraceEvent::Kind::Snapshot;
  e.node = node;
  e.image = node + ".png";
  e.hint = hint;
  return e;
}

WalkthroughTrace reference_walkthrough() {
  WalkthroughTrace trace;
  auto& ev = trace.events;
  ev.push_back(move_to("office_desk", "office"));
  ev.push_back(snapshot("office_desk", "Alice's desk with her laptop"));
  ev.push_back(move_to("office_shelf", "office"));
  ev.push_back(snapshot("office_shelf", "supply shelf, coffee tray on top"));
  ev.push_back(move_to("office_table", "office"));
  ev.push_back(snapshot("office_table", "meeting table"));
  ev.push_back(move_to("hallway", "corridor"));
  ev.push_back(move_to("lounge_sofa", "lounge"));
  ev.push_back(snapshot("lounge_sofa", "sofa facing the TV"));
  ev.push_back(move_to("lounge_table", "lounge"));
  ev.push_back(snapshot("lounge_table", "low table between the sofas"));
  ev.push_back(move_to("lounge_shelf", "lounge"));
  ev.push_back(snapshot("lounge_shelf", "games shelf"));
  ev.push_back(move_to("hallway", "corridor"));
  ev.push_back(move_to("kitchen_sink", "kitchen"));
  ev.push_back(snapshot("kitchen_sink", "sink and counter"));
  ev.push_back(move_to("kitchen_fridge", "kitchen"));
  ev.push_back(snapshot("kitchen_fridge", "shared fridge, keep it closed"));
  ev.push_back(move_to("kitchen_table", "kitchen"));
  ev.push_back(snapshot("kitchen_table", "small dining table"));
  return trace;
}

EditCommand edit(EditOp op) {
  EditCommand cmd;
  cmd.op = op;
  return cmd;
}

std::vector<EditCommand> enrichment_edits() {
  std::vector<EditCommand> edits;

  EditCommand bob = edit(EditOp::AddPerson);
  bob.value = json({{"name", "Bob"}, {"location", "lounge_sofa"}}).dump();
  edits.push_back(bob);

  EditCommand alice = edit(EditOp::AddPerson);
  alice.value = json({{"name", "Alice"}, {"location", "office_desk"}}).dump();
  edits.push_back(alice);

  EditCommand tea = edit(EditOp::SetOwner);
  tea.node = "lounge_table";
  tea.entity = "table";
  tea.object = "iced_tea";
  tea.value = "\"Bob\"";
  edits.push_back(tea);

  EditCommand leftovers = tea;
  leftovers.object = "leftovers_box";
  edits.push_back(leftovers);

  return edits;
}

SemanticPayload without_owners(SemanticPayload payload) {
  for (auto& entity : payload.entities) {
    for (auto& obj : entity.objects) obj.owner.reset();
  }
  return payload;
}

TaskSpec task(const std::string& name, const std::string& direct,
              const std::string& indirect, const std::string& goal_doc) {
  TaskSpec t;
  t.name = name;
  t.query_direct = direct;
  if (!indirect.empty()) t.query_indirect = indirect;
  t.start = "office_desk";
  t.goal = parse_goal(goal_doc);
  return t;
}

std::string held(const std::string& category) {
  return json({{"kind", "object-held"},
               {"query", {{"category", category}}}})
      .dump();
}

std::vector<TaskSpec> table1_tasks() {
  return {
      task("Get Sponge", "Get me the sponge.", "", held("sponge")),
      task("Get Coffee", "Get me some coffee.", "", held("coffee")),
      task("Get Tissue", "Get me a tissue.", "", held("tissue")),
  };
}

std::vector<TaskSpec> table2_tasks() {
  std::vector<TaskSpec> tasks;
  tasks.push_back(task("Watch TV", "Get me the TV remote.",
                       "I want to watch TV.", held("remote")));
  tasks.push_back(task("Runny Nose", "Get me a tissue.",
                       "I have a sniffly nose.", held("tissue")));
  tasks.push_back(task("Private listening", "Get me the headphones.",
                       "I want to listen to music without disturbing anyone.",
                       held("headphones")));
  tasks.push_back(task("Sanitization", "Get me the hand sanitizer.",
                       "My hands feel grimy.", held("sanitizer")));
  tasks.push_back(task("Call a friend", "Get me the desk phone.",
                       "I need to call a friend.", held("phone")));
  tasks.push_back(task("Flavor Coffee", "Get me the sugar jar.",
                       "My coffee tastes too bitter.", held("sugar")));
  tasks.push_back(task(
      "Store Bob's leftovers", "Put Bob's leftovers in the fridge.",
      "Bob is done eating; tidy his food away.",
      json({{"kind", "object-at-node"},
            {"query", {{"category", "leftovers"}, {"owner", "Bob"}}},
            {"node", "kitchen_fridge"}})
          .dump()));
  tasks.push_back(task("Get Bob his drink", "Bring Bob his drink.",
                       "Bob is thirsty for his usual.",
                       json({{"kind", "object-given"},
                             {"query", {{"category", "drink"}, {"owner", "Bob"}}},
                             {"person", "Bob"}})
                           .dump()));
  tasks.push_back(task("Bob's things to Alice", "Take Bob's things to Alice.",
                       "Alice needs everything that belongs to Bob.",
                       json({{"kind", "object-given"},
                             {"query", {{"owner", "Bob"}}},
                             {"person", "Alice"}})
                           .dump()));
  return tasks;
}

json condition(const char* planner, const char* variant, const char* form) {
  return {{"planner", planner}, {"variant", variant}, {"form", form}};
}

// Records one planner exchange against a scripted reply so the eval
// harness can replay it byte-exactly later.
void record_transcript(const fs::path& out, const SentMap& reference,
                       const TaskSpec& spec, MapVariant variant,
                       const std::string& reply) {
  SkillApi api = default_skill_api();
  SentMap variant_map = derive_variant(reference, variant);
  PlannerPrompt prompt = assemble_prompt(variant_map, api, spec.query_direct);
  PlanChecker checker = variant == MapVariant::Baseline
                            ? make_structural_checker(variant_map, api)
                            : make_plan_checker(variant_map, spec.start, api);
  EndpointConfig config = fixture_endpoint_config("recorded_fm");

  ReplyScript script({reply});
  try {
    plan_with_endpoint(prompt, script, config, api, checker);
  } catch (const ModelRefusal&) {
    // a refusal is a legitimate outcome to record
  } catch (const Error& e) {
    std::cerr << "authored reply for '" << spec.name
              << "' does not survive planning: " << e.what() << "\n";
    std::exit(1);
  }
  put(out, serialize_transcript(script.transcript()));
}

std::string fenced_plan(std::initializer_list<const char*> lines) {
  std::string out = "```json\n[\n";
  bool first = true;
  for (const char* line : lines) {
    if (!first) out += ",\n";
    out += "  ";
    out += line;
    first = false;
  }
  out += "\n]\n```\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path dir = argc > 1 ? argv[1] : "fixtures";
  fs::create_directories(dir / "describer");
  fs::create_directories(dir / "describer_bad");
  fs::create_directories(dir / "goals");
  fs::create_directories(dir / "transcripts" / "recorded_fm");
  fs::create_directories(dir / "golden");

  SentMap reference = reference_environment();
  put(dir / "reference.json", serialize_map(reference));

  WalkthroughTrace trace = reference_walkthrough();
  put(dir / "walkthrough_trace.json", serialize_trace(trace));

  for (const auto& [id, node] : reference.nodes) {
    if (!node.semantic) continue;
    put(dir / "describer" / (id + ".png.json"),
        serialize_payload(without_owners(*node.semantic)));
  }
  // owners referencing people the map does not declare yet: rejected at
  // build time, used to exercise that rejection
  put(dir / "describer_bad" / "lounge_table.png.json",
      serialize_payload(*reference.nodes.at("lounge_table").semantic));

  std::vector<EditCommand> edits = enrichment_edits();
  put(dir / "enrichment_edits.json", serialize_edit_commands(edits));

  // the fixture tree must be self-consistent: trace + payloads + edits
  // must rebuild the reference map exactly
  FixtureDescriber describer((dir / "describer").string());
  BuildResult built = build_map(trace, describer);
  SentMap patched = review_and_patch(built.map, edits);
  if (serialize_map(patched) != serialize_map(reference)) {
    std::cerr << "rebuild from trace + edits does not match reference.json\n";
    return 1;
  }

  std::vector<TaskSpec> table1 = table1_tasks();
  std::vector<TaskSpec> table2 = table2_tasks();
  put(dir / "tasks_table1.json", serialize_tasks(table1));
  put(dir / "tasks_table2.json", serialize_tasks(table2));

  for (const auto& t : table1) {
    put(dir / "goals" / (task_slug(t.name) + ".json"), serialize_goal(t.goal));
  }

  put(dir / "oracle_both.json",
      json::array({condition("oracle", "baseline", "direct"),
                   condition("oracle", "enhanced", "direct")})
              .dump(2) +
          "\n");
  put(dir / "oracle_ownership.json",
      json::array({condition("oracle", "enhanced", "direct"),
                   condition("oracle", "enhanced+ownership", "direct")})
              .dump(2) +
          "\n");
  json fixture_baseline = condition("fixture", "baseline", "direct");
  fixture_baseline["label"] = "recorded_fm";
  fixture_baseline["dir"] = "transcripts/recorded_fm";
  json fixture_enhanced = condition("fixture", "enhanced", "direct");
  fixture_enhanced["label"] = "recorded_fm";
  fixture_enhanced["dir"] = "transcripts/recorded_fm";
  put(dir / "recorded_fm_table1.json",
      json::array({fixture_baseline, fixture_enhanced}).dump(2) + "\n");

  put(dir / "endpoint_config.example.json",
      json({{"base_url", "http://localhost:11434/v1"},
            {"model", "llama3.1"},
            {"api_key_env", "SENTMAP_API_KEY"},
            {"temperature", 0.0},
            {"timeout_s", 60},
            {"retries", 2}})
              .dump(2) +
          "\n");

  // Recorded planning-model exchanges for tasks_table1: the baseline map
  // starves the model of object locations (one lucky guess, one refusal,
  // one wrong guess), the enhanced map names every location.
  const fs::path tdir = dir / "transcripts" / "recorded_fm";
  record_transcript(
      tdir / "get_sponge__baseline__direct.json", reference, table1[0],
      MapVariant::Baseline,
      "Sponges are usually kept by a kitchen sink, so I'll try there.\n\n" +
          fenced_plan({R"({"skill": "goto", "args": ["kitchen_sink"]})",
                       R"({"skill": "pick", "args": ["sponge"]})"}));
  record_transcript(
      tdir / "get_coffee__baseline__direct.json", reference, table1[1],
      MapVariant::Baseline,
      "I'm sorry, but I cannot plan this reliably. The map lists only "
      "location names with no information about objects, so I cannot "
      "tell where coffee might be.\n");
  record_transcript(
      tdir / "get_tissue__baseline__direct.json", reference, table1[2],
      MapVariant::Baseline,
      "Tissues are often kept on a table; the office table seems most "
      "likely.\n\n" +
          fenced_plan({R"({"skill": "goto", "args": ["office_table"]})",
                       R"({"skill": "pick", "args": ["tissue_box"]})"}));
  record_transcript(
      tdir / "get_sponge__enhanced__direct.json", reference, table1[0],
      MapVariant::Enhanced,
      "The scene lists a sponge on the sink counter at kitchen_sink.\n\n" +
          fenced_plan({R"({"skill": "goto", "args": ["kitchen_sink"]})",
                       R"({"skill": "pick", "args": ["sponge"]})"}));
  record_transcript(
      tdir / "get_coffee__enhanced__direct.json", reference, table1[1],
      MapVariant::Enhanced,
      "Coffee powder sits on the tray at office_shelf, one node away.\n\n" +
          fenced_plan({R"({"skill": "goto", "args": ["office_shelf"]})",
                       R"({"skill": "pick", "args": ["coffee_powder"]})"}));
  record_transcript(
      tdir / "get_tissue__enhanced__direct.json", reference, table1[2],
      MapVariant::Enhanced,
      "The tissue box is on the lounge table.\n\n" +
          fenced_plan({R"({"skill": "goto", "args": ["lounge_table"]})",
                       R"({"skill": "pick", "args": ["tissue_box"]})"}));

  // golden reports for regression: regenerate, never hand-edit
  {
    std::string base = dir.string();
    auto oracle_both =
        parse_conditions(json::array({condition("oracle", "baseline", "direct"),
                                      condition("oracle", "enhanced", "direct")})
                             .dump(),
                         base);
    EvalReport r1 = run_suite(table1, oracle_both, reference);
    put(dir / "golden" / "oracle_table1.md",
        render_report(r1, ReportFormat::Markdown));

    auto oracle_own = parse_conditions(
        json::array({condition("oracle", "enhanced", "direct"),
                     condition("oracle", "enhanced+ownership", "direct")})
            .dump(),
        base);
    EvalReport r2 = run_suite(table2, oracle_own, reference);
    put(dir / "golden" / "oracle_table2.md",
        render_report(r2, ReportFormat::Markdown));

    auto recorded = parse_conditions(
        json::array({fixture_baseline, fixture_enhanced}).dump(), base);
    EvalReport r3 = run_suite(table1, recorded, reference);
    put(dir / "golden" / "recorded_fm_table1.md",
        render_report(r3, ReportFormat::Markdown));
    put(dir / "golden" / "recorded_fm_table1.json",
        render_report(r3, ReportFormat::Json));
  }

  std::cout << "wrote " << files_written << " files under " << dir.string()
            << "\n";
  return 0;
}
