#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sentmap/core.hpp"

namespace sentmap {

enum class ParamKind { Node, Object, Entity, Person };

const char* to_string(ParamKind k);
std::optional<ParamKind> param_kind_from_string(const std::string& s);

struct SkillSpec {
  std::string name;
  std::vector<std::pair<std::string, ParamKind>> params;
  std::string description;
  std::string preconditions_doc;

  bool operator==(const SkillSpec&) const = default;

  size_t arity() const { return params.size(); }
  // e.g. "place(item: object, target: entity)"
  std::string signature() const;
};

// Signature text back to (name, params); inverse of SkillSpec::signature.
std::optional<SkillSpec> parse_skill_signature(const std::string& text);

struct RobotConstraints {
  int arm_count = 1;
  int gripper_capacity = 1;

  bool operator==(const RobotConstraints&) const = default;
};

struct SkillApi {
  std::vector<SkillSpec> skills;
  RobotConstraints constraints;

  bool operator==(const SkillApi&) const = default;

  const SkillSpec* find(const std::string& name) const;
};

// The six grounded skills the planner may emit, single-arm constraints.
SkillApi default_skill_api();

// Deterministic prompt sections
std::string render_skill_api(const SkillApi& api);
std::string render_constraints(const RobotConstraints& constraints);

struct SkillCall {
  std::string skill;
  std::vector<std::string> args;

  bool operator==(const SkillCall&) const = default;
};

struct Plan {
  std::vector<SkillCall> steps;
  std::string rationale;

  bool operator==(const Plan&) const = default;
};

// Machine-checkable success criterion behind a natural-language task.
struct GoalSpec {
  enum class Kind { ObjectAtNode, ObjectHeld, ObjectGiven, EntityState };

  Kind kind = Kind::ObjectHeld;
  ObjectQuery query;           // object goals
  NodeId node;                 // object-at-node, entity-state
  std::string person;          // object-given
  std::string entity;          // entity-state
  EntityState state = EntityState::Closed;  // entity-state

  bool operator==(const GoalSpec&) const = default;
};

// Goal wire form: {"kind": "...", "query": {...}, "node"/"person"/...}
GoalSpec parse_goal(const std::string& doc);
std::string serialize_goal(const GoalSpec& goal);

// Plan wire form: {"rationale": "...", "steps": [{"skill","args"}...]};
// a bare JSON array of steps is accepted on input.
Plan parse_plan_file(const std::string& doc);
std::string serialize_plan(const Plan& plan);

}  // namespace sentmap
