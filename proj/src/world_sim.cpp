#include "sentmap/world_sim.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

using nlohmann::json;

namespace sentmap {

const char* to_string(StepErrKind kind) {
  switch (kind) {
    case StepErrKind::UnknownNode: return "unknown-node";
    case StepErrKind::UnknownObject: return "unknown-object";
    case StepErrKind::UnknownEntity: return "unknown-entity";
    case StepErrKind::UnknownPerson: return "unknown-person";
    case StepErrKind::NotAdjacentPath: return "not-adjacent-path";
    case StepErrKind::ObjectNotHere: return "object-not-here";
    case StepErrKind::ContainerClosed: return "container-closed";
    case StepErrKind::GripperOccupied: return "gripper-occupied";
    case StepErrKind::GripperEmpty: return "gripper-empty";
    case StepErrKind::NoAffordance: return "no-affordance";
    case StepErrKind::PersonNotHere: return "person-not-here";
    case StepErrKind::UnknownSkill: return "unknown-skill";
    case StepErrKind::ArityMismatch: return "arity-mismatch";
  }
  return "?";
}

bool is_unknown_identifier_error(StepErrKind kind) {
  switch (kind) {
    case StepErrKind::UnknownNode:
    case StepErrKind::UnknownObject:
    case StepErrKind::UnknownEntity:
    case StepErrKind::UnknownPerson:
    case StepErrKind::UnknownSkill:
      return true;
    default:
      return false;
  }
}

std::string StepError::to_text() const {
  return std::string(to_string(kind)) + ": " + detail;
}

bool WorldState::is_holding(const std::string& object) const {
  return std::find(holding.begin(), holding.end(), object) != holding.end();
}

WorldState initial_state(const SentMap& map, const NodeId& start) {
  if (!map.has_node(start)) throw Error(ErrKind::UnknownNode, start);
  WorldState state;
  state.robot_at = start;
  for (const auto& [id, node] : map.nodes) {
    if (!node.semantic) continue;
    for (const auto& entity : node.semantic->entities) {
      if (entity.state) {
        state.entity_states[{id, entity.name}] = *entity.state;
      }
      for (const auto& obj : entity.objects) {
        auto [it, inserted] = state.object_locations.emplace(
            obj.name, Placement::at(id, entity.name));
        if (!inserted) {
          throw Error(ErrKind::DuplicateObjectName,
                      "'" + obj.name + "' appears at " + it->second.node +
                          " and " + id +
                          "; the simulator needs map-unique object names");
        }
      }
    }
  }
  return state;
}

namespace {

StepOutcome fail(const WorldState& state, StepErrKind kind,
                 std::string detail) {
  StepOutcome out;
  out.ok = false;
  out.error = StepError{kind, std::move(detail)};
  out.state_after = state;
  return out;
}

const Entity* entity_at(const SentMap& map, const NodeId& node,
                        const std::string& name) {
  auto it = map.nodes.find(node);
  if (it == map.nodes.end() || !it->second.semantic) return nullptr;
  for (const auto& entity : it->second.semantic->entities) {
    if (entity.name == name) return &entity;
  }
  return nullptr;
}

bool entity_closed(const WorldState& state, const NodeId& node,
                   const std::string& entity) {
  auto it = state.entity_states.find({node, entity});
  return it != state.entity_states.end() && it->second == EntityState::Closed;
}

StepOutcome do_goto(const SentMap& map, const WorldState& state,
                    const std::string& dest) {
  if (!map.has_node(dest)) {
    return fail(state, StepErrKind::UnknownNode,
                "'" + dest + "' is not in the map");
  }
  // global motion planning happens inside the simulator: the skill level
  // names the destination, the path is expanded over map edges
  try {
    shortest_path(map, state.robot_at, dest);
  } catch (const Error&) {
    return fail(state, StepErrKind::NotAdjacentPath,
                "no path from '" + state.robot_at + "' to '" + dest + "'");
  }
  StepOutcome out;
  out.ok = true;
  out.state_after = state;
  out.state_after.robot_at = dest;
  return out;
}

StepOutcome do_pick(const SentMap& map, const WorldState& state,
                    const std::string& object, const SkillApi& api) {
  auto it = state.object_locations.find(object);
  if (it == state.object_locations.end()) {
    return fail(state, StepErrKind::UnknownObject,
                "'" + object + "' is not in the map");
  }
  const Placement& placement = it->second;
  if (placement.kind != Placement::Kind::At ||
      placement.node != state.robot_at) {
    return fail(state, StepErrKind::ObjectNotHere,
                "'" + object + "' is not at '" + state.robot_at + "'");
  }
  if (entity_closed(state, placement.node, placement.entity)) {
    return fail(state, StepErrKind::ContainerClosed,
                "'" + placement.entity + "' must be opened first");
  }
  const Entity* entity = entity_at(map, placement.node, placement.entity);
  if (!entity || !entity->affordances.count(Affordance::SupportsPick)) {
    return fail(state, StepErrKind::NoAffordance,
                "'" + placement.entity + "' does not support pick");
  }
  if (state.holding.size() >=
      static_cast<size_t>(api.constraints.gripper_capacity)) {
    return fail(state, StepErrKind::GripperOccupied,
                "already holding " + std::to_string(state.holding.size()) +
                    " object(s)");
  }
  StepOutcome out;
  out.ok = true;
  out.state_after = state;
  out.state_after.holding.push_back(object);
  out.state_after.object_locations[object] = Placement::held();
  return out;
}

StepOutcome do_place(const SentMap& map, const WorldState& state,
                     const std::string& object, const std::string& entity) {
  if (!state.object_locations.count(object)) {
    return fail(state, StepErrKind::UnknownObject,
                "'" + object + "' is not in the map");
  }
  if (!state.is_holding(object)) {
    return fail(state, StepErrKind::GripperEmpty,
                "not holding '" + object + "'");
  }
  const Entity* target = entity_at(map, state.robot_at, entity);
  if (!target) {
    return fail(state, StepErrKind::UnknownEntity,
                "no entity '" + entity + "' at '" + state.robot_at + "'");
  }
  if (!target->affordances.count(Affordance::SupportsPlace)) {
    return fail(state, StepErrKind::NoAffordance,
                "'" + entity + "' does not support place");
  }
  if (entity_closed(state, state.robot_at, entity)) {
    return fail(state, StepErrKind::ContainerClosed,
                "'" + entity + "' must be opened first");
  }
  StepOutcome out;
  out.ok = true;
  out.state_after = state;
  auto& holding = out.state_after.holding;
  holding.erase(std::find(holding.begin(), holding.end(), object));
  out.state_after.object_locations[object] =
      Placement::at(state.robot_at, entity);
  return out;
}

StepOutcome do_toggle(const SentMap& map, const WorldState& state,
                      const std::string& entity, EntityState target_state) {
  const Entity* target = entity_at(map, state.robot_at, entity);
  if (!target) {
    return fail(state, StepErrKind::UnknownEntity,
                "no entity '" + entity + "' at '" + state.robot_at + "'");
  }
  Affordance needed = target_state == EntityState::Open ? Affordance::Openable
                                                        : Affordance::Closable;
  if (!target->affordances.count(needed) || !target->state) {
    return fail(state, StepErrKind::NoAffordance,
                "'" + entity + "' cannot be " +
                    (target_state == EntityState::Open ? "opened" : "closed"));
  }
  StepOutcome out;
  out.ok = true;
  out.state_after = state;
  out.state_after.entity_states[{state.robot_at, entity}] = target_state;
  return out;
}

StepOutcome do_give(const SentMap& map, const WorldState& state,
                    const std::string& object, const std::string& person) {
  if (!state.object_locations.count(object)) {
    return fail(state, StepErrKind::UnknownObject,
                "'" + object + "' is not in the map");
  }
  if (!state.is_holding(object)) {
    return fail(state, StepErrKind::GripperEmpty,
                "not holding '" + object + "'");
  }
  const Person* target = map.find_person(person);
  if (!target) {
    return fail(state, StepErrKind::UnknownPerson,
                "'" + person + "' is not a declared person");
  }
  if (!target->location || *target->location != state.robot_at) {
    return fail(state, StepErrKind::PersonNotHere,
                "'" + person + "' is not at '" + state.robot_at + "'");
  }
  StepOutcome out;
  out.ok = true;
  out.state_after = state;
  auto& holding = out.state_after.holding;
  holding.erase(std::find(holding.begin(), holding.end(), object));
  out.state_after.object_locations[object] = Placement::given_to(person);
  return out;
}

}  // namespace

StepOutcome step(const SentMap& map, const WorldState& state,
                 const SkillCall& call, const SkillApi& api) {
  const SkillSpec* spec = api.find(call.skill);
  if (!spec) {
    return fail(state, StepErrKind::UnknownSkill,
                "'" + call.skill + "' is not in the skill API");
  }
  if (call.args.size() != spec->arity()) {
    return fail(state, StepErrKind::ArityMismatch,
                call.skill + " takes " + std::to_string(spec->arity()) +
                    " argument(s), got " + std::to_string(call.args.size()));
  }
  if (call.skill == "goto") return do_goto(map, state, call.args[0]);
  if (call.skill == "pick") return do_pick(map, state, call.args[0], api);
  if (call.skill == "place") {
    return do_place(map, state, call.args[0], call.args[1]);
  }
  if (call.skill == "open") {
    return do_toggle(map, state, call.args[0], EntityState::Open);
  }
  if (call.skill == "close") {
    return do_toggle(map, state, call.args[0], EntityState::Closed);
  }
  if (call.skill == "give") {
    return do_give(map, state, call.args[0], call.args[1]);
  }
  return fail(state, StepErrKind::UnknownSkill,
              "'" + call.skill + "' has no execution semantics");
}

VerifyResult verify_plan(const SentMap& map, const NodeId& start,
                         const Plan& plan, const SkillApi& api) {
  VerifyResult result;
  WorldState state = initial_state(map, start);
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    StepOutcome outcome = step(map, state, plan.steps[i], api);
    result.trace.push_back(outcome);
    if (!outcome.ok) {
      result.ok = false;
      result.error = outcome.error;
      result.failed_step = i;
      result.final_state = std::move(state);
      return result;
    }
    state = std::move(outcome.state_after);
  }
  result.ok = true;
  result.final_state = std::move(state);
  return result;
}

std::string VerifyResult::verdict_text() const {
  if (ok) return "ok";
  std::ostringstream os;
  os << "failed at step " << failed_step << ": " << error->to_text();
  return os.str();
}

bool check_goal(const WorldState& state, const GoalSpec& goal,
                const SentMap& map) {
  if (goal.kind == GoalSpec::Kind::EntityState) {
    if (!entity_at(map, goal.node, goal.entity)) {
      throw Error(ErrKind::UnresolvableGoal,
                  "no entity '" + goal.entity + "' at '" + goal.node + "'");
    }
    auto it = state.entity_states.find({goal.node, goal.entity});
    return it != state.entity_states.end() && it->second == goal.state;
  }

  std::vector<FoundObject> matches = find_object(map, goal.query);
  if (matches.empty()) {
    throw Error(ErrKind::UnresolvableGoal,
                "no object in the map matches {" + goal.query.describe() + "}");
  }
  for (const auto& match : matches) {
    auto it = state.object_locations.find(match.object.name);
    if (it == state.object_locations.end()) return false;
    const Placement& placement = it->second;
    switch (goal.kind) {
      case GoalSpec::Kind::ObjectHeld:
        if (placement.kind != Placement::Kind::Held) return false;
        break;
      case GoalSpec::Kind::ObjectAtNode:
        if (placement.kind != Placement::Kind::At ||
            placement.node != goal.node) {
          return false;
        }
        break;
      case GoalSpec::Kind::ObjectGiven:
        if (placement.kind != Placement::Kind::GivenTo ||
            placement.person != goal.person) {
          return false;
        }
        break;
      case GoalSpec::Kind::EntityState:
        break;  // handled above
    }
  }
  return true;
}

namespace {

json placement_to_json(const Placement& placement) {
  json j;
  switch (placement.kind) {
    case Placement::Kind::At:
      j["kind"] = "at";
      j["node"] = placement.node;
      j["entity"] = placement.entity;
      break;
    case Placement::Kind::Held:
      j["kind"] = "held";
      break;
    case Placement::Kind::GivenTo:
      j["kind"] = "given-to";
      j["person"] = placement.person;
      break;
  }
  return j;
}

json state_to_json(const WorldState& state) {
  json j;
  j["robot_at"] = state.robot_at;
  j["holding"] = state.holding;
  json entities = json::object();
  for (const auto& [key, value] : state.entity_states) {
    entities[key.first][key.second] = to_string(value);
  }
  j["entity_states"] = std::move(entities);
  json objects = json::object();
  for (const auto& [name, placement] : state.object_locations) {
    objects[name] = placement_to_json(placement);
  }
  j["objects"] = std::move(objects);
  return j;
}

}  // namespace

std::string StepOutcome::to_json_line() const {
  json j;
  j["ok"] = ok;
  if (error) {
    json je;
    je["kind"] = to_string(error->kind);
    je["detail"] = error->detail;
    j["error"] = std::move(je);
  }
  j["state_after"] = state_to_json(state_after);
  return j.dump();
}

}  // namespace sentmap
