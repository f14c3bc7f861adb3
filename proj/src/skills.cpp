#include "sentmap/skills.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

using nlohmann::json;

namespace sentmap {

const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::Node: return "node";
    case ParamKind::Object: return "object";
    case ParamKind::Entity: return "entity";
    case ParamKind::Person: return "person";
  }
  return "?";
}

std::optional<ParamKind> param_kind_from_string(const std::string& s) {
  if (s == "node") return ParamKind::Node;
  if (s == "object") return ParamKind::Object;
  if (s == "entity") return ParamKind::Entity;
  if (s == "person") return ParamKind::Person;
  return std::nullopt;
}

std::string SkillSpec::signature() const {
  std::ostringstream os;
  os << name << "(";
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) os << ", ";
    os << params[i].first << ": " << to_string(params[i].second);
  }
  os << ")";
  return os.str();
}

std::optional<SkillSpec> parse_skill_signature(const std::string& text) {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    return std::nullopt;
  }
  SkillSpec spec;
  spec.name = text.substr(0, open);
  std::string inner = text.substr(open + 1, close - open - 1);
  std::istringstream is(inner);
  std::string part;
  while (std::getline(is, part, ',')) {
    auto colon = part.find(':');
    if (colon == std::string::npos) return std::nullopt;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(' ');
      size_t e = s.find_last_not_of(' ');
      return b == std::string::npos ? std::string()
                                    : s.substr(b, e - b + 1);
    };
    std::string pname = trim(part.substr(0, colon));
    auto kind = param_kind_from_string(trim(part.substr(colon + 1)));
    if (pname.empty() || !kind) return std::nullopt;
    spec.params.emplace_back(pname, *kind);
  }
  return spec;
}

const SkillSpec* SkillApi::find(const std::string& name) const {
  for (const auto& skill : skills) {
    if (skill.name == name) return &skill;
  }
  return nullptr;
}

SkillApi default_skill_api() {
  SkillApi api;
  api.skills = {
      {"goto",
       {{"destination", ParamKind::Node}},
       "Move the robot to the named navigation node.",
       "a path of map edges exists from the current node to the destination"},
      {"pick",
       {{"item", ParamKind::Object}},
       "Grasp the named object at the robot's current node.",
       "object is at the current node; its entity is open if it has a state; "
       "entity supports pick; the gripper has room"},
      {"place",
       {{"item", ParamKind::Object}, {"target", ParamKind::Entity}},
       "Put a held object onto or into the named entity at the current node.",
       "holding the object; entity is at the current node, supports place, "
       "and is open if it has a state"},
      {"open",
       {{"target", ParamKind::Entity}},
       "Open the named entity at the robot's current node.",
       "entity is at the current node and is openable"},
      {"close",
       {{"target", ParamKind::Entity}},
       "Close the named entity at the robot's current node.",
       "entity is at the current node and is closable"},
      {"give",
       {{"item", ParamKind::Object}, {"recipient", ParamKind::Person}},
       "Hand a held object to the named person.",
       "holding the object; the person is located at the current node"},
  };
  api.constraints = RobotConstraints{1, 1};
  return api;
}

std::string render_skill_api(const SkillApi& api) {
  std::ostringstream os;
  for (const auto& skill : api.skills) {
    os << skill.signature() << ": " << skill.description
       << " Preconditions: " << skill.preconditions_doc << "\n";
  }
  return os.str();
}

std::string render_constraints(const RobotConstraints& constraints) {
  std::ostringstream os;
  os << "The robot has " << constraints.arm_count << " arm(s) and can hold "
     << constraints.gripper_capacity << " object(s) at a time.\n";
  return os.str();
}

namespace {

const char* to_string(GoalSpec::Kind kind) {
  switch (kind) {
    case GoalSpec::Kind::ObjectAtNode: return "object-at-node";
    case GoalSpec::Kind::ObjectHeld: return "object-held";
    case GoalSpec::Kind::ObjectGiven: return "object-given";
    case GoalSpec::Kind::EntityState: return "entity-state";
  }
  return "?";
}

std::optional<GoalSpec::Kind> goal_kind_from_string(const std::string& s) {
  if (s == "object-at-node") return GoalSpec::Kind::ObjectAtNode;
  if (s == "object-held") return GoalSpec::Kind::ObjectHeld;
  if (s == "object-given") return GoalSpec::Kind::ObjectGiven;
  if (s == "entity-state") return GoalSpec::Kind::EntityState;
  return std::nullopt;
}

std::string req_str(const json& j, const char* key, const char* ctx) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrKind::ConfigError,
                std::string(ctx) + " needs string field \"" + key + "\"");
  }
  return j.at(key).get<std::string>();
}

ObjectQuery query_from_json(const json& j) {
  ObjectQuery q;
  if (!j.is_object()) {
    throw Error(ErrKind::ConfigError, "object query must be an object");
  }
  if (j.contains("name")) q.name = j.at("name").get<std::string>();
  if (j.contains("category")) q.category = j.at("category").get<std::string>();
  if (j.contains("owner")) q.owner = j.at("owner").get<std::string>();
  return q;
}

json query_to_json(const ObjectQuery& q) {
  json j = json::object();
  if (q.name) j["name"] = *q.name;
  if (q.category) j["category"] = *q.category;
  if (q.owner) j["owner"] = *q.owner;
  return j;
}

}  // namespace

GoalSpec parse_goal(const std::string& doc) {
  json parsed;
  try {
    parsed = json::parse(doc);
  } catch (const json::parse_error& e) {
    throw Error(ErrKind::ConfigError,
                std::string("goal is not valid JSON: ") + e.what());
  }
  if (!parsed.is_object()) {
    throw Error(ErrKind::ConfigError, "goal must be a JSON object");
  }
  GoalSpec goal;
  auto kind = goal_kind_from_string(req_str(parsed, "kind", "goal"));
  if (!kind) {
    throw Error(ErrKind::ConfigError,
                "unknown goal kind '" + req_str(parsed, "kind", "goal") + "'");
  }
  goal.kind = *kind;
  switch (goal.kind) {
    case GoalSpec::Kind::ObjectAtNode:
      goal.query = query_from_json(parsed.value("query", json::object()));
      goal.node = req_str(parsed, "node", "object-at-node goal");
      break;
    case GoalSpec::Kind::ObjectHeld:
      goal.query = query_from_json(parsed.value("query", json::object()));
      break;
    case GoalSpec::Kind::ObjectGiven:
      goal.query = query_from_json(parsed.value("query", json::object()));
      goal.person = req_str(parsed, "person", "object-given goal");
      break;
    case GoalSpec::Kind::EntityState: {
      goal.node = req_str(parsed, "node", "entity-state goal");
      goal.entity = req_str(parsed, "entity", "entity-state goal");
      auto state = entity_state_from_string(
          req_str(parsed, "state", "entity-state goal"));
      if (!state) {
        throw Error(ErrKind::ConfigError,
                    "entity-state goal state must be \"open\" or \"closed\"");
      }
      goal.state = *state;
      break;
    }
  }
  if (goal.kind != GoalSpec::Kind::EntityState && goal.query.empty()) {
    throw Error(ErrKind::ConfigError,
                "goal query needs at least one of name/category/owner");
  }
  return goal;
}

std::string serialize_goal(const GoalSpec& goal) {
  json j;
  j["kind"] = to_string(goal.kind);
  switch (goal.kind) {
    case GoalSpec::Kind::ObjectAtNode:
      j["query"] = query_to_json(goal.query);
      j["node"] = goal.node;
      break;
    case GoalSpec::Kind::ObjectHeld:
      j["query"] = query_to_json(goal.query);
      break;
    case GoalSpec::Kind::ObjectGiven:
      j["query"] = query_to_json(goal.query);
      j["person"] = goal.person;
      break;
    case GoalSpec::Kind::EntityState:
      j["node"] = goal.node;
      j["entity"] = goal.entity;
      j["state"] = sentmap::to_string(goal.state);
      break;
  }
  return j.dump(2) + "\n";
}

Plan parse_plan_file(const std::string& doc) {
  json parsed;
  try {
    parsed = json::parse(doc);
  } catch (const json::parse_error& e) {
    throw Error(ErrKind::ConfigError,
                std::string("plan is not valid JSON: ") + e.what());
  }
  json steps;
  Plan plan;
  if (parsed.is_array()) {
    steps = parsed;
  } else if (parsed.is_object() && parsed.contains("steps")) {
    steps = parsed.at("steps");
    plan.rationale = parsed.value("rationale", "");
  } else {
    throw Error(ErrKind::ConfigError,
                "plan must be a JSON array of steps or {rationale, steps}");
  }
  if (!steps.is_array()) {
    throw Error(ErrKind::ConfigError, "plan steps must be an array");
  }
  for (const auto& step : steps) {
    if (!step.is_object() || !step.contains("skill") ||
        !step.at("skill").is_string()) {
      throw Error(ErrKind::ConfigError,
                  "each plan step needs a \"skill\" string");
    }
    SkillCall call;
    call.skill = step.at("skill").get<std::string>();
    for (const auto& arg : step.value("args", json::array())) {
      if (!arg.is_string()) {
        throw Error(ErrKind::ConfigError, "plan step args must be strings");
      }
      call.args.push_back(arg.get<std::string>());
    }
    plan.steps.push_back(std::move(call));
  }
  return plan;
}

std::string serialize_plan(const Plan& plan) {
  json j;
  j["rationale"] = plan.rationale;
  json steps = json::array();
  for (const auto& step : plan.steps) {
    json js;
    js["skill"] = step.skill;
    js["args"] = step.args;
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  return j.dump(2) + "\n";
}

}  // namespace sentmap
