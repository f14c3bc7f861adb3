#include "sentmap/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "sentmap/map_io.hpp"
#include "sentmap/planning.hpp"
#include "sentmap/world_sim.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace sentmap {

const char* to_string(MapVariant variant) {
  switch (variant) {
    case MapVariant::Baseline: return "baseline";
    case MapVariant::Enhanced: return "enhanced";
    case MapVariant::EnhancedOwnership: return "enhanced+ownership";
  }
  return "?";
}

std::optional<MapVariant> map_variant_from_string(const std::string& s) {
  if (s == "baseline") return MapVariant::Baseline;
  if (s == "enhanced") return MapVariant::Enhanced;
  if (s == "enhanced+ownership") return MapVariant::EnhancedOwnership;
  return std::nullopt;
}

SentMap strip_ownership(const SentMap& map) {
  SentMap out = map;
  for (auto& [id, node] : out.nodes) {
    if (!node.semantic) continue;
    for (auto& entity : node.semantic->entities) {
      for (auto& obj : entity.objects) obj.owner.reset();
    }
  }
  return out;
}

SentMap derive_variant(const SentMap& reference, MapVariant variant) {
  switch (variant) {
    case MapVariant::Baseline: return strip_semantics(reference);
    case MapVariant::Enhanced: return strip_ownership(reference);
    case MapVariant::EnhancedOwnership: return reference;
  }
  return reference;
}

const char* to_string(QueryForm form) {
  return form == QueryForm::Direct ? "direct" : "indirect";
}

std::optional<QueryForm> query_form_from_string(const std::string& s) {
  if (s == "direct") return QueryForm::Direct;
  if (s == "indirect") return QueryForm::Indirect;
  return std::nullopt;
}

const char* to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::Oracle: return "oracle";
    case PlannerKind::Fixture: return "fixture";
    case PlannerKind::Live: return "live";
  }
  return "?";
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "success";
    case Outcome::Failure: return "failure";
    case Outcome::Refusal: return "refusal";
    case Outcome::NotApplicable: return "n/a";
  }
  return "?";
}

std::optional<Outcome> outcome_from_string(const std::string& s) {
  if (s == "success") return Outcome::Success;
  if (s == "failure") return Outcome::Failure;
  if (s == "refusal") return Outcome::Refusal;
  if (s == "n/a") return Outcome::NotApplicable;
  return std::nullopt;
}

const char* outcome_mark(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "✓";        // ✓
    case Outcome::Failure: return "✗";        // ✗
    case Outcome::Refusal: return "∅";        // ∅
    case Outcome::NotApplicable: return "–";  // –
  }
  return "?";
}

namespace {

std::string read_file_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrKind::ConfigError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string resolve_against(const std::string& base_dir,
                            const std::string& path) {
  if (path.empty() || base_dir.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).string();
}

}  // namespace

std::vector<Condition> parse_conditions(const std::string& doc,
                                        const std::string& base_dir) {
  json arr = json::parse(doc, nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) {
    throw Error(ErrKind::ConfigError,
                "conditions file must be a JSON array");
  }
  std::vector<Condition> conditions;
  for (size_t i = 0; i < arr.size(); ++i) {
    const json& j = arr[i];
    auto bad = [&](const std::string& what) {
      return Error(ErrKind::ConfigError,
                   "condition " + std::to_string(i) + ": " + what);
    };
    if (!j.is_object()) throw bad("expected an object");
    Condition cond;

    auto variant =
        map_variant_from_string(j.value("variant", std::string()));
    if (!variant) {
      throw bad("\"variant\" must be baseline, enhanced, or "
                "enhanced+ownership");
    }
    cond.variant = *variant;

    auto form = query_form_from_string(j.value("form", std::string()));
    if (!form) throw bad("\"form\" must be direct or indirect");
    cond.form = *form;

    std::string planner = j.value("planner", std::string());
    if (planner == "oracle") {
      cond.planner = PlannerKind::Oracle;
      cond.label = j.value("label", std::string("oracle"));
    } else if (planner == "fixture") {
      cond.planner = PlannerKind::Fixture;
      cond.label = j.value("label", std::string());
      if (cond.label.empty()) throw bad("fixture planner needs a \"label\"");
      cond.fixture_dir =
          resolve_against(base_dir, j.value("dir", std::string()));
      if (cond.fixture_dir.empty()) {
        throw bad("fixture planner needs a transcript \"dir\"");
      }
    } else if (planner == "live") {
      cond.planner = PlannerKind::Live;
      std::string config_path = j.value("config", std::string());
      if (config_path.empty()) {
        throw bad("live planner needs a \"config\" path");
      }
      cond.endpoint = load_endpoint_config(
          resolve_against(base_dir, config_path));
      cond.label = j.value("label", cond.endpoint.model);
    } else {
      throw bad("\"planner\" must be oracle, fixture, or live");
    }
    conditions.push_back(std::move(cond));
  }
  if (conditions.empty()) {
    throw Error(ErrKind::ConfigError, "conditions file lists no conditions");
  }
  return conditions;
}

std::vector<TaskSpec> parse_tasks(const std::string& doc) {
  json arr = json::parse(doc, nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) {
    throw Error(ErrKind::ConfigError, "tasks file must be a JSON array");
  }
  std::vector<TaskSpec> tasks;
  for (size_t i = 0; i < arr.size(); ++i) {
    const json& j = arr[i];
    auto bad = [&](const std::string& what) {
      return Error(ErrKind::ConfigError,
                   "task " + std::to_string(i) + ": " + what);
    };
    if (!j.is_object()) throw bad("expected an object");
    TaskSpec task;
    task.name = j.value("name", std::string());
    if (task.name.empty()) throw bad("\"name\" is required");
    task.query_direct = j.value("query_direct", std::string());
    if (task.query_direct.empty()) throw bad("\"query_direct\" is required");
    if (j.contains("query_indirect")) {
      task.query_indirect = j.at("query_indirect").get<std::string>();
    }
    task.start = j.value("start", std::string());
    if (task.start.empty()) throw bad("\"start\" is required");
    if (!j.contains("goal")) throw bad("\"goal\" is required");
    try {
      task.goal = parse_goal(j.at("goal").dump());
    } catch (const Error& e) {
      throw bad(std::string("goal: ") + e.what());
    }
    tasks.push_back(std::move(task));
  }
  if (tasks.empty()) {
    throw Error(ErrKind::ConfigError, "tasks file lists no tasks");
  }
  return tasks;
}

std::string serialize_tasks(const std::vector<TaskSpec>& tasks) {
  json arr = json::array();
  for (const auto& task : tasks) {
    json j;
    j["name"] = task.name;
    j["query_direct"] = task.query_direct;
    if (task.query_indirect) j["query_indirect"] = *task.query_indirect;
    j["goal"] = json::parse(serialize_goal(task.goal));
    j["start"] = task.start;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

const EvalCell* EvalReport::find(const std::string& condition_key,
                                 const std::string& task) const {
  for (const auto& cell : cells) {
    if (cell.condition == condition_key && cell.task == task) return &cell;
  }
  return nullptr;
}

std::pair<int, int> EvalReport::tally(const std::string& condition_key) const {
  int successes = 0;
  int applicable = 0;
  for (const auto& cell : cells) {
    if (cell.condition != condition_key) continue;
    if (cell.outcome == Outcome::NotApplicable) continue;
    ++applicable;
    if (cell.outcome == Outcome::Success) ++successes;
  }
  return {successes, applicable};
}

std::string format_average(int successes, int applicable) {
  if (applicable == 0) return "–";
  // percent with one decimal, exact integer arithmetic: round(1000*s/a)
  long scaled = (2000L * successes + applicable) / (2L * applicable);
  std::ostringstream os;
  os << scaled / 10 << "." << scaled % 10 << "%";
  return os.str();
}

namespace {

ObjectItem item(std::string name, std::string category,
                std::optional<std::string> owner = std::nullopt) {
  ObjectItem obj;
  obj.name = std::move(name);
  obj.category = std::move(category);
  obj.owner = std::move(owner);
  return obj;
}

Entity surface(std::string name, std::string kind,
               std::vector<ObjectItem> objects) {
  Entity entity;
  entity.name = std::move(name);
  entity.kind = std::move(kind);
  entity.affordances = {Affordance::SupportsPlace, Affordance::SupportsPick};
  entity.objects = std::move(objects);
  return entity;
}

Entity container(std::string name, std::string kind, EntityState state,
                 std::vector<ObjectItem> objects) {
  Entity entity;
  entity.name = std::move(name);
  entity.kind = std::move(kind);
  entity.state = state;
  entity.affordances = {Affordance::Openable, Affordance::Closable,
                        Affordance::SupportsPlace, Affordance::SupportsPick};
  entity.objects = std::move(objects);
  return entity;
}

NavNode semantic_node(std::string id, std::string zone, std::string label,
                      std::string description, std::vector<Entity> entities) {
  NavNode node;
  node.id = std::move(id);
  node.zone = std::move(zone);
  SemanticPayload payload;
  payload.label = std::move(label);
  payload.description = std::move(description);
  payload.entities = std::move(entities);
  node.semantic = std::move(payload);
  return node;
}

}  // namespace

SentMap reference_environment() {
  SentMap map;
  std::vector<NavNode> nodes;

  nodes.push_back(semantic_node(
      "office_desk", "office", "office desk",
      "Alice's work desk by the window.",
      {surface("desk", "desk",
               {item("laptop", "electronics"), item("headphones", "headphones"),
                item("desk_phone", "phone")})}));
  nodes.push_back(semantic_node(
      "office_shelf", "office", "office shelf",
      "Supply shelf with a serving tray on top.",
      {surface("tray", "tray", {item("coffee_powder", "coffee")}),
       surface("shelf", "shelf",
               {item("stapler", "stationery"),
                item("printer_paper", "stationery")})}));
  nodes.push_back(semantic_node(
      "office_table", "office", "office table",
      "Meeting table in the office corner.",
      {surface("table", "table",
               {item("monitor_cable", "cable"),
                item("whiteboard_marker", "stationery")})}));

  NavNode hallway;
  hallway.id = "hallway";
  hallway.zone = "corridor";
  nodes.push_back(std::move(hallway));

  nodes.push_back(semantic_node(
      "lounge_sofa", "lounge", "lounge sofa",
      "Sofa facing the television.",
      {surface("sofa", "sofa",
               {item("cushion", "cushion"), item("tv_remote", "remote")})}));
  nodes.push_back(semantic_node(
      "lounge_table", "lounge", "lounge table",
      "Low table between the sofas.",
      {surface("table", "table",
               {item("tissue_box", "tissue"),
                item("iced_tea", "drink", "Bob"),
                item("leftovers_box", "leftovers", "Bob")})}));
  nodes.push_back(semantic_node(
      "lounge_shelf", "lounge", "lounge shelf",
      "Shelf with games and a speaker.",
      {surface("shelf", "shelf",
               {item("board_game", "game"), item("speaker", "electronics")})}));
  nodes.push_back(semantic_node(
      "kitchen_sink", "kitchen", "kitchen sink",
      "Sink and counter by the kitchen window.",
      {surface("sink_counter", "counter",
               {item("sponge", "sponge"), item("dish_soap", "cleaning"),
                item("hand_sanitizer", "sanitizer")})}));
  nodes.push_back(semantic_node(
      "kitchen_fridge", "kitchen", "kitchen fridge",
      "Shared refrigerator.",
      {container("fridge", "fridge", EntityState::Closed,
                 {item("orange_juice", "drink"), item("milk_carton", "drink"),
                  item("butter_dish", "dairy")})}));
  nodes.push_back(semantic_node(
      "kitchen_table", "kitchen", "kitchen table",
      "Small dining table.",
      {surface("table", "table",
               {item("cola_can", "drink"), item("sugar_jar", "sugar")})}));

  map = add_nav_nodes(std::move(map), std::move(nodes));

  const char* walk[] = {"office_desk", "office_shelf", "office_table",
                        "hallway",     "lounge_sofa",  "lounge_table",
                        "lounge_shelf", "hallway",     "kitchen_sink",
                        "kitchen_fridge", "kitchen_table"};
  for (size_t i = 1; i < std::size(walk); ++i) {
    map = add_edge(std::move(map), walk[i - 1], walk[i],
                   /*bidirectional=*/true);
  }

  Person bob;
  bob.name = "Bob";
  bob.location = "lounge_sofa";
  Person alice;
  alice.name = "Alice";
  alice.location = "office_desk";
  map.people = {std::move(bob), std::move(alice)};
  return map;
}

EndpointConfig fixture_endpoint_config(const std::string& label) {
  EndpointConfig config;
  config.base_url = "fixture://" + label;
  config.model = label;
  config.api_key_env = "";
  config.temperature = 0.0;
  config.timeout_s = 1;
  config.retries = 0;
  return config;
}

std::string task_slug(const std::string& name) {
  std::string slug;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!slug.empty() && slug.back() != '_') {
      slug += '_';
    }
  }
  while (!slug.empty() && slug.back() == '_') slug.pop_back();
  return slug;
}

std::string transcript_stem(const TaskSpec& task, const Condition& condition) {
  return task_slug(task.name) + "__" + to_string(condition.variant) + "__" +
         to_string(condition.form);
}

namespace {

std::pair<Outcome, std::string> score_plan(const SentMap& reference,
                                           const TaskSpec& task,
                                           const Plan& plan,
                                           const SkillApi& api) {
  VerifyResult result = verify_plan(reference, task.start, plan, api);
  if (!result.ok) {
    return {Outcome::Failure, "execution failed: " + result.verdict_text()};
  }
  if (!check_goal(result.final_state, task.goal, reference)) {
    return {Outcome::Failure,
            "the plan executed but the goal is not satisfied"};
  }
  return {Outcome::Success,
          "verified, " + std::to_string(plan.steps.size()) + " step(s)"};
}

std::pair<Outcome, std::string> run_oracle_cell(const SentMap& reference,
                                                const SentMap& variant_map,
                                                const TaskSpec& task,
                                                const Condition& condition,
                                                const SkillApi& api) {
  if (condition.form == QueryForm::Indirect) {
    return {Outcome::NotApplicable,
            "indirect phrasing needs a language model; the oracle plans "
            "from explicit goals"};
  }
  try {
    Plan plan = oracle_plan(variant_map, task.goal, task.start, api);
    return score_plan(reference, task, plan, api);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrKind::TargetNotFound:
      case ErrKind::AmbiguousTarget:
      case ErrKind::Unreachable:
      case ErrKind::UnresolvableGoal:
      case ErrKind::EmptyQuery:
        return {Outcome::Failure, e.what()};
      default:
        throw;
    }
  }
}

std::pair<Outcome, std::string> run_endpoint_cell(const SentMap& reference,
                                                  const SentMap& variant_map,
                                                  const TaskSpec& task,
                                                  const Condition& condition,
                                                  const SkillApi& api) {
  std::string query = condition.form == QueryForm::Direct
                          ? task.query_direct
                          : task.query_indirect.value_or("");
  if (query.empty()) {
    return {Outcome::NotApplicable, "the task has no indirect phrasing"};
  }

  PlannerPrompt prompt = assemble_prompt(variant_map, api, query);
  // a stripped map cannot license object/entity references, so baseline
  // plans are only shape-checked before execution — mirroring a real
  // robot discovering the error at execution time
  PlanChecker checker = condition.variant == MapVariant::Baseline
                            ? make_structural_checker(variant_map, api)
                            : make_plan_checker(variant_map, task.start, api);

  std::unique_ptr<ChatEndpoint> endpoint;
  EndpointConfig config;
  if (condition.planner == PlannerKind::Fixture) {
    config = fixture_endpoint_config(condition.label);
    fs::path path = fs::path(condition.fixture_dir) /
                    (transcript_stem(task, condition) + ".json");
    if (!fs::exists(path)) {
      throw Error(ErrKind::ConfigError,
                  "missing fixture transcript " + path.string() +
                      " for task '" + task.name + "'");
    }
    endpoint = std::make_unique<ScriptedEndpoint>(
        load_transcript(path.string()));
  } else {
    config = condition.endpoint;
    endpoint = std::make_unique<HttpChatEndpoint>(config);
  }

  try {
    PlanningResult result =
        plan_with_endpoint(prompt, *endpoint, config, api, checker);
    auto [outcome, detail] = score_plan(reference, task, result.plan, api);
    detail += ", " + std::to_string(result.transcript.size()) +
              " round-trip(s)";
    return {outcome, detail};
  } catch (const ModelRefusal& e) {
    return {Outcome::Refusal, e.what()};
  } catch (const PlanRejected& e) {
    return {Outcome::Failure, e.what()};
  }
}

}  // namespace

EvalReport run_suite(const std::vector<TaskSpec>& tasks,
                     const std::vector<Condition>& conditions,
                     const SentMap& reference) {
  SkillApi api = default_skill_api();
  EvalReport report;
  for (const auto& task : tasks) report.tasks.push_back(task.name);

  for (const auto& condition : conditions) {
    ConditionLabel label{condition.label, to_string(condition.variant),
                         to_string(condition.form)};
    report.conditions.push_back(label);
    SentMap variant_map = derive_variant(reference, condition.variant);

    for (const auto& task : tasks) {
      auto [outcome, detail] =
          condition.planner == PlannerKind::Oracle
              ? run_oracle_cell(reference, variant_map, task, condition, api)
              : run_endpoint_cell(reference, variant_map, task, condition,
                                  api);
      report.cells.push_back({label.key(), task.name, outcome,
                              std::move(detail)});
    }
  }
  return report;
}

namespace {

json report_to_json(const EvalReport& report) {
  json j;
  json conditions = json::array();
  for (const auto& c : report.conditions) {
    conditions.push_back({{"planner", c.planner},
                          {"variant", c.variant},
                          {"form", c.form}});
  }
  j["conditions"] = std::move(conditions);
  j["tasks"] = report.tasks;
  json cells = json::array();
  for (const auto& cell : report.cells) {
    cells.push_back({{"condition", cell.condition},
                     {"task", cell.task},
                     {"outcome", to_string(cell.outcome)},
                     {"detail", cell.detail}});
  }
  j["cells"] = std::move(cells);
  json averages = json::array();
  for (const auto& c : report.conditions) {
    auto [successes, applicable] = report.tally(c.key());
    averages.push_back({{"condition", c.key()},
                        {"successes", successes},
                        {"applicable", applicable},
                        {"percent", format_average(successes, applicable)}});
  }
  j["averages"] = std::move(averages);
  return j;
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    return report_to_json(report).dump(2) + "\n";
  }

  std::ostringstream os;
  os << "| Planner | Map | Query |";
  for (const auto& task : report.tasks) os << " " << task << " |";
  os << " Average |\n";
  os << "| --- | --- | --- |";
  for (size_t i = 0; i < report.tasks.size(); ++i) os << " --- |";
  os << " --- |\n";

  for (const auto& c : report.conditions) {
    os << "| " << c.planner << " | " << c.variant << " | " << c.form << " |";
    for (const auto& task : report.tasks) {
      const EvalCell* cell = report.find(c.key(), task);
      os << " " << (cell ? outcome_mark(cell->outcome) : "?") << " |";
    }
    auto [successes, applicable] = report.tally(c.key());
    os << " " << format_average(successes, applicable) << " |\n";
  }
  os << "\n✓ success · ✗ failure · ∅ refusal · "
        "– not applicable\n";
  return os.str();
}

EvalReport report_from_json(const std::string& doc) {
  json j = json::parse(doc, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrKind::ConfigError, "report is not a JSON object");
  }
  EvalReport report;
  try {
    for (const auto& c : j.at("conditions")) {
      report.conditions.push_back({c.at("planner").get<std::string>(),
                                   c.at("variant").get<std::string>(),
                                   c.at("form").get<std::string>()});
    }
    for (const auto& t : j.at("tasks")) {
      report.tasks.push_back(t.get<std::string>());
    }
    for (const auto& c : j.at("cells")) {
      auto outcome = outcome_from_string(c.at("outcome").get<std::string>());
      if (!outcome) {
        throw Error(ErrKind::ConfigError,
                    "unknown outcome '" +
                        c.at("outcome").get<std::string>() + "'");
      }
      report.cells.push_back({c.at("condition").get<std::string>(),
                              c.at("task").get<std::string>(), *outcome,
                              c.value("detail", std::string())});
    }
    if (j.contains("averages")) {
      // stored averages are redundant; reject a document whose numbers
      // disagree with its own rows
      for (const auto& a : j.at("averages")) {
        auto [successes, applicable] =
            report.tally(a.at("condition").get<std::string>());
        if (a.at("successes").get<int>() != successes ||
            a.at("applicable").get<int>() != applicable) {
          throw Error(ErrKind::ConfigError,
                      "stored averages do not match the report rows");
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrKind::ConfigError, std::string("report: ") + e.what());
  }
  return report;
}

}  // namespace sentmap
