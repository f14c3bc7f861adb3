#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sentmap/core.hpp"
#include "sentmap/skills.hpp"

// Discrete world model and skill-execution semantics. Every step checks
// its preconditions against the map-derived state; a step the map does not
// license is rejected and leaves the state untouched, which is what makes
// plan verification sound against hallucinated nodes, objects, and
// affordances.

namespace sentmap {

struct Placement {
  enum class Kind { At, Held, GivenTo };

  Kind kind = Kind::Held;
  NodeId node;         // At
  std::string entity;  // At
  std::string person;  // GivenTo

  bool operator==(const Placement&) const = default;

  static Placement at(NodeId node, std::string entity) {
    return {Kind::At, std::move(node), std::move(entity), {}};
  }
  static Placement held() { return {Kind::Held, {}, {}, {}}; }
  static Placement given_to(std::string person) {
    return {Kind::GivenTo, {}, {}, std::move(person)};
  }
};

struct WorldState {
  NodeId robot_at;
  std::vector<std::string> holding;  // bounded by gripper capacity
  std::map<std::pair<NodeId, std::string>, EntityState> entity_states;
  std::map<std::string, Placement> object_locations;

  bool operator==(const WorldState&) const = default;

  bool is_holding(const std::string& object) const;
};

enum class StepErrKind {
  UnknownNode,
  UnknownObject,
  UnknownEntity,
  UnknownPerson,
  NotAdjacentPath,
  ObjectNotHere,
  ContainerClosed,
  GripperOccupied,
  GripperEmpty,
  NoAffordance,
  PersonNotHere,
  // plan-level rejections so verify_plan stays total over arbitrary input
  UnknownSkill,
  ArityMismatch,
};

const char* to_string(StepErrKind kind);
bool is_unknown_identifier_error(StepErrKind kind);

struct StepError {
  StepErrKind kind;
  std::string detail;

  bool operator==(const StepError&) const = default;
  std::string to_text() const;
};

struct StepOutcome {
  bool ok = false;
  std::optional<StepError> error;
  WorldState state_after;

  // one JSON object, no newline, for JSONL trace export
  std::string to_json_line() const;
};

// Robot at start, gripper empty, entity states and object placements
// copied from the map. Throws UnknownNode for a missing start and
// DuplicateObjectName when two map objects share a name (the simulator
// identifies objects by name).
WorldState initial_state(const SentMap& map, const NodeId& start);

// Executes one skill call. Never throws: failures come back as the step
// error, with state_after equal to the input state.
StepOutcome step(const SentMap& map, const WorldState& state,
                 const SkillCall& call, const SkillApi& api);

struct VerifyResult {
  bool ok = false;
  std::optional<StepError> error;
  size_t failed_step = 0;  // meaningful when !ok
  WorldState final_state;
  std::vector<StepOutcome> trace;  // executed prefix, including the failure

  std::string verdict_text() const;
};

// Runs the plan from start, stopping at the first failing step.
VerifyResult verify_plan(const SentMap& map, const NodeId& start,
                         const Plan& plan, const SkillApi& api);

// True iff the goal predicate holds of the state. Object queries resolve
// against the map; all matched objects must satisfy the placement. Throws
// UnresolvableGoal when the query matches nothing in the map (or the
// entity-state target does not exist).
bool check_goal(const WorldState& state, const GoalSpec& goal,
                const SentMap& map);

}  // namespace sentmap
