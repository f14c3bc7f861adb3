#include "sentmap/planning.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <sstream>

#include "sentmap/map_io.hpp"

using nlohmann::json;

namespace sentmap {

namespace {

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string section(const std::string& title, std::string body) {
  if (body.empty() || body.back() != '\n') body += '\n';
  return "## " + title + "\n\n" + body + "\n";
}

}  // namespace

PlannerPrompt assemble_prompt(const SentMap& map, const SkillApi& api,
                              const std::string& query) {
  if (trim(query).empty()) {
    throw Error(ErrKind::EmptyQuery, "the task query is empty");
  }
  PlannerPrompt prompt;
  prompt.scene = serialize_map(map);
  prompt.skill_api_text = render_skill_api(api);
  prompt.constraints_text = render_constraints(api.constraints);
  prompt.query = query;
  return prompt;
}

std::string planner_system_text() {
  return "You are a mobile robot task planner. Plan only with the skills in "
         "the skill API and only over node, object, entity, and person "
         "identifiers that appear in the scene JSON. Reply with a brief "
         "explanation followed by the plan as a fenced JSON array of steps, "
         "each step an object {\"skill\": \"...\", \"args\": [\"...\"]}. If "
         "the scene does not contain the information needed to act with "
         "confidence, say so instead of guessing.";
}

std::string render_prompt(const PlannerPrompt& prompt) {
  std::string text = section("Scene", prompt.scene) +
                     section("Skill API", prompt.skill_api_text) +
                     section("Robot constraints", prompt.constraints_text) +
                     section("Task", prompt.query);
  while (text.size() >= 2 && text[text.size() - 1] == '\n' &&
         text[text.size() - 2] == '\n') {
    text.pop_back();
  }
  return text;
}

namespace {

// end of the balanced bracket run opening at `begin`, honoring strings
size_t balanced_end(const std::string& text, size_t begin) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = begin; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      --depth;
      if (depth == 0) return i + 1;
      if (depth < 0) return std::string::npos;
    }
  }
  return std::string::npos;
}

bool plan_shaped(const json& j) {
  if (!j.is_array() || j.empty()) return false;
  for (const auto& el : j) {
    if (!el.is_object() || !el.contains("skill") ||
        !el.at("skill").is_string()) {
      return false;
    }
  }
  return true;
}

std::string drop_fence_lines(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).rfind("```", 0) == 0) continue;
    if (!first) out << '\n';
    out << line;
    first = false;
  }
  return out.str();
}

std::string arg_text(const json& a) {
  return a.is_string() ? a.get<std::string>() : a.dump();
}

}  // namespace

Plan parse_plan(const std::string& reply, const SkillApi& api) {
  json steps_json;
  size_t begin = std::string::npos;
  size_t end = std::string::npos;
  for (size_t pos = reply.find('['); pos != std::string::npos;
       pos = reply.find('[', pos + 1)) {
    size_t close = balanced_end(reply, pos);
    if (close == std::string::npos) continue;
    json candidate = json::parse(reply.substr(pos, close - pos),
                                 nullptr, false);
    if (candidate.is_discarded() || !plan_shaped(candidate)) continue;
    steps_json = std::move(candidate);
    begin = pos;
    end = close;
    break;
  }
  if (begin == std::string::npos) {
    throw Error(ErrKind::NoPlanFound,
                "the reply contains no JSON array of {\"skill\", \"args\"} "
                "steps");
  }

  Plan plan;
  for (size_t i = 0; i < steps_json.size(); ++i) {
    const json& el = steps_json[i];
    SkillCall call;
    call.skill = el.at("skill").get<std::string>();
    if (el.contains("args")) {
      const json& args = el.at("args");
      if (args.is_array()) {
        for (const auto& a : args) call.args.push_back(arg_text(a));
      } else {
        call.args.push_back(arg_text(args));
      }
    }
    const SkillSpec* spec = api.find(call.skill);
    if (!spec) {
      throw Error(ErrKind::UnknownSkill,
                  "'" + call.skill + "' (step " + std::to_string(i) + ")");
    }
    if (call.args.size() != spec->arity()) {
      throw Error(ErrKind::ArityMismatch,
                  call.skill + " takes " + std::to_string(spec->arity()) +
                      " argument(s), got " + std::to_string(call.args.size()) +
                      " (step " + std::to_string(i) + ")");
    }
    plan.steps.push_back(std::move(call));
  }
  plan.rationale = trim(drop_fence_lines(reply.substr(0, begin)) + "\n" +
                        drop_fence_lines(reply.substr(end)));
  return plan;
}

std::string render_plan(const Plan& plan) {
  std::ostringstream out;
  out << "```json\n[";
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    out << (i ? ",\n  " : "\n  ");
    out << "{\"skill\": " << json(plan.steps[i].skill).dump()
        << ", \"args\": [";
    for (size_t a = 0; a < plan.steps[i].args.size(); ++a) {
      if (a) out << ", ";
      out << json(plan.steps[i].args[a]).dump();
    }
    out << "]}";
  }
  out << "\n]\n```\n";
  return out.str();
}

PlanChecker make_plan_checker(const SentMap& map, const NodeId& start,
                              const SkillApi& api) {
  // capture by value: the checker routinely outlives eval's variant maps
  return [map, start, api](const Plan& plan) -> std::optional<std::string> {
    VerifyResult result = verify_plan(map, start, plan, api);
    if (result.ok) return std::nullopt;
    return result.verdict_text();
  };
}

std::optional<std::string> structural_plan_check(const SentMap& map,
                                                 const SkillApi& api,
                                                 const Plan& plan) {
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    const SkillCall& call = plan.steps[i];
    const SkillSpec* spec = api.find(call.skill);
    if (!spec) {
      return "step " + std::to_string(i) + ": unknown skill '" + call.skill +
             "'";
    }
    if (call.args.size() != spec->arity()) {
      return "step " + std::to_string(i) + ": " + call.skill + " takes " +
             std::to_string(spec->arity()) + " argument(s), got " +
             std::to_string(call.args.size());
    }
    for (size_t p = 0; p < spec->params.size(); ++p) {
      if (spec->params[p].second == ParamKind::Node &&
          !map.has_node(call.args[p])) {
        return "step " + std::to_string(i) + ": unknown node '" +
               call.args[p] + "'";
      }
    }
  }
  return std::nullopt;
}

PlanChecker make_structural_checker(const SentMap& map, const SkillApi& api) {
  return [map, api](const Plan& plan) {
    return structural_plan_check(map, api, plan);
  };
}

PlanRejected::PlanRejected(std::string last_error, Transcript transcript)
    : Error(ErrKind::PlanRejected,
            last_error + " (after " + std::to_string(transcript.size()) +
                " round-trip(s))"),
      last_error_(std::move(last_error)),
      transcript_(std::move(transcript)) {}

ModelRefusal::ModelRefusal(std::string raw, Transcript transcript)
    : Error(ErrKind::ModelRefusal,
            "the model declined to plan: " + trim(raw).substr(0, 160)),
      raw_(std::move(raw)),
      transcript_(std::move(transcript)) {}

bool looks_like_refusal(const std::string& reply) {
  static const char* kMarkers[] = {
      "i cannot",    "i can't",          "i am unable",
      "i'm unable",  "unable to",        "cannot assist",
      "can't assist", "cannot provide",  "can't provide",
      "need more context",               "need more information",
      "need additional context",         "not enough information",
      "insufficient information",        "i'm sorry",
      "i am sorry",  "refuse",           "decline",
  };
  std::string lowered = lowercase(reply);
  for (const char* marker : kMarkers) {
    if (lowered.find(marker) != std::string::npos) return true;
  }
  return false;
}

namespace {

std::string repair_text(const std::string& rejection) {
  return "The previous reply was rejected: " + rejection +
         "\nReply with a corrected plan as a fenced JSON array of "
         "{\"skill\", \"args\"} steps, using only identifiers from the "
         "scene.";
}

}  // namespace

PlanningResult plan_with_endpoint(const PlannerPrompt& prompt,
                                  ChatEndpoint& endpoint,
                                  const EndpointConfig& config,
                                  const SkillApi& api,
                                  const PlanChecker& checker,
                                  int repair_budget) {
  std::vector<ChatMessage> messages{{"system", planner_system_text()},
                                    {"user", render_prompt(prompt)}};
  Transcript transcript;
  std::string last_error = "no reply received";

  for (int round = 0; round <= repair_budget; ++round) {
    std::string request = build_chat_request(config, messages);
    std::string response = endpoint.complete(request);
    transcript.push_back({fnv1a_hex(request), request, response});
    std::string reply = extract_reply(response);

    std::optional<Plan> plan;
    try {
      plan = parse_plan(reply, api);
    } catch (const Error& e) {
      if (e.kind() == ErrKind::NoPlanFound && looks_like_refusal(reply)) {
        throw ModelRefusal(reply, std::move(transcript));
      }
      last_error = e.what();
    }
    if (plan) {
      std::optional<std::string> rejection = checker(*plan);
      if (!rejection) return {std::move(*plan), std::move(transcript)};
      last_error = *rejection;
    }
    messages.push_back({"assistant", reply});
    messages.push_back({"user", repair_text(last_error)});
  }
  throw PlanRejected(last_error, std::move(transcript));
}

AmbiguousTargetError::AmbiguousTargetError(std::vector<FoundObject> candidates)
    : Error(ErrKind::AmbiguousTarget,
            [&candidates] {
              std::ostringstream os;
              os << candidates.size() << " candidate(s):";
              for (const auto& c : candidates) {
                os << " " << c.object.name << "@" << c.node;
              }
              os << " — the map cannot disambiguate the query";
              return os.str();
            }()),
      candidates_(std::move(candidates)) {}

namespace {

std::vector<FoundObject> all_objects(const SentMap& map) {
  std::vector<FoundObject> out;
  for (const auto& [id, node] : map.nodes) {
    if (!node.semantic) continue;
    for (const auto& entity : node.semantic->entities) {
      for (const auto& obj : entity.objects) {
        out.push_back({id, entity.name, obj});
      }
    }
  }
  return out;
}

// One query, one answer set: unique hits and disambiguated multi-hits come
// back for delivery; everything else is a planner-level error, which is
// exactly the abstain-instead-of-guess behavior the baseline comparison
// needs.
std::vector<FoundObject> resolve_targets(const SentMap& map,
                                         const ObjectQuery& query) {
  std::vector<FoundObject> found = find_object(map, query);
  if (!found.empty()) {
    if (found.size() == 1 || query.owner || query.name) return found;
    throw AmbiguousTargetError(std::move(found));
  }
  if (query.owner) {
    // the tag may simply be missing from the map; retry without it and
    // accept a unique hit, otherwise surface the ambiguity
    ObjectQuery relaxed = query;
    relaxed.owner.reset();
    std::vector<FoundObject> loose =
        relaxed.empty() ? all_objects(map) : find_object(map, relaxed);
    if (loose.size() == 1) return loose;
    if (loose.size() > 1) throw AmbiguousTargetError(std::move(loose));
  }
  throw Error(ErrKind::TargetNotFound,
              "no object in the map matches {" + query.describe() + "}");
}

const Entity* map_entity(const SentMap& map, const NodeId& node,
                         const std::string& name) {
  auto it = map.nodes.find(node);
  if (it == map.nodes.end() || !it->second.semantic) return nullptr;
  for (const auto& entity : it->second.semantic->entities) {
    if (entity.name == name) return &entity;
  }
  return nullptr;
}

const Entity* place_surface(const SentMap& map, const NodeId& node) {
  auto it = map.nodes.find(node);
  if (it == map.nodes.end() || !it->second.semantic) return nullptr;
  for (const auto& entity : it->second.semantic->entities) {
    if (entity.affordances.count(Affordance::SupportsPlace)) return &entity;
  }
  return nullptr;
}

// Builds the plan while executing it, so every emitted step is one the
// simulator has already accepted.
struct OracleBuilder {
  const SentMap& map;
  const SkillApi& api;
  WorldState state;
  Plan plan;

  OracleBuilder(const SentMap& m, const SkillApi& a, const NodeId& start)
      : map(m), api(a), state(initial_state(m, start)) {}

  void emit(const std::string& skill, std::vector<std::string> args) {
    SkillCall call{skill, std::move(args)};
    StepOutcome outcome = step(map, state, call, api);
    if (!outcome.ok) {
      throw Error(ErrKind::InvariantBroken,
                  "oracle emitted a step its own simulator rejects: " +
                      call.skill + " -> " + outcome.error->to_text());
    }
    state = std::move(outcome.state_after);
    plan.steps.push_back(std::move(call));
  }

  void walk_to(const NodeId& dest) {
    if (state.robot_at == dest) return;
    std::vector<NodeId> path = shortest_path(map, state.robot_at, dest);
    for (size_t i = 1; i < path.size(); ++i) emit("goto", {path[i]});
  }

  // opens a closed container and reports it so the caller can restore it
  std::optional<std::string> open_if_closed(const std::string& entity) {
    auto it = state.entity_states.find({state.robot_at, entity});
    if (it != state.entity_states.end() &&
        it->second == EntityState::Closed) {
      emit("open", {entity});
      return entity;
    }
    return std::nullopt;
  }

  void restore(const std::optional<std::string>& opened) {
    if (opened) emit("close", {*opened});
  }

  void fetch(const FoundObject& target) {
    walk_to(target.node);
    std::optional<std::string> opened = open_if_closed(target.entity);
    emit("pick", {target.object.name});
    restore(opened);
  }
};

}  // namespace

Plan oracle_plan(const SentMap& map, const GoalSpec& goal,
                 const NodeId& start, const SkillApi& api) {
  if (!map.has_node(start)) {
    throw Error(ErrKind::UnknownNode, "start '" + start + "'");
  }
  OracleBuilder builder(map, api, start);
  std::vector<FoundObject> targets;

  if (goal.kind == GoalSpec::Kind::EntityState) {
    if (!map.has_node(goal.node)) {
      throw Error(ErrKind::UnknownNode, "goal node '" + goal.node + "'");
    }
    const Entity* entity = map_entity(map, goal.node, goal.entity);
    Affordance needed = goal.state == EntityState::Open
                            ? Affordance::Openable
                            : Affordance::Closable;
    if (!entity || !entity->state || !entity->affordances.count(needed)) {
      throw Error(ErrKind::UnresolvableGoal,
                  "no stateful entity '" + goal.entity + "' at '" +
                      goal.node + "' that can be " +
                      (goal.state == EntityState::Open ? "opened" : "closed"));
    }
    builder.walk_to(goal.node);
    builder.emit(goal.state == EntityState::Open ? "open" : "close",
                 {goal.entity});
  } else {
    targets = resolve_targets(map, goal.query);
    if (goal.kind == GoalSpec::Kind::ObjectHeld &&
        targets.size() >
            static_cast<size_t>(api.constraints.gripper_capacity)) {
      // more matches than the gripper can hold at once: the query needs
      // narrowing, same surface as any other ambiguity
      throw AmbiguousTargetError(std::move(targets));
    }

    for (const FoundObject& target : targets) {
      builder.fetch(target);
      switch (goal.kind) {
        case GoalSpec::Kind::ObjectHeld:
          break;
        case GoalSpec::Kind::ObjectAtNode: {
          if (!map.has_node(goal.node)) {
            throw Error(ErrKind::UnknownNode,
                        "goal node '" + goal.node + "'");
          }
          builder.walk_to(goal.node);
          const Entity* surface = place_surface(map, goal.node);
          if (!surface) {
            throw Error(ErrKind::UnresolvableGoal,
                        "no entity at '" + goal.node + "' supports place");
          }
          std::optional<std::string> opened =
              builder.open_if_closed(surface->name);
          builder.emit("place", {target.object.name, surface->name});
          builder.restore(opened);
          break;
        }
        case GoalSpec::Kind::ObjectGiven: {
          const Person* person = map.find_person(goal.person);
          if (!person) {
            throw Error(ErrKind::TargetNotFound,
                        "person '" + goal.person +
                            "' is not declared in the map");
          }
          if (!person->location) {
            throw Error(ErrKind::TargetNotFound,
                        "person '" + goal.person +
                            "' has no known location in the map");
          }
          builder.walk_to(*person->location);
          builder.emit("give", {target.object.name, goal.person});
          break;
        }
        case GoalSpec::Kind::EntityState:
          break;  // handled above
      }
    }
  }

  VerifyResult check = verify_plan(map, start, builder.plan, api);
  if (!check.ok) {
    throw Error(ErrKind::InvariantBroken,
                "oracle plan failed verification: " + check.verdict_text());
  }
  // self-check against resolved object names, not the raw query: owner
  // relaxation may have answered a query this map cannot re-answer
  bool achieved = true;
  if (goal.kind == GoalSpec::Kind::EntityState) {
    achieved = check_goal(check.final_state, goal, map);
  } else {
    for (const FoundObject& target : targets) {
      GoalSpec pinned = goal;
      pinned.query = {};
      pinned.query.name = target.object.name;
      achieved = achieved && check_goal(check.final_state, pinned, map);
    }
  }
  if (!achieved) {
    throw Error(ErrKind::InvariantBroken,
                "oracle plan does not achieve its goal");
  }
  return builder.plan;
}

}  // namespace sentmap
