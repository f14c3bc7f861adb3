#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// In-memory model of a SENT-Map: a topological graph of navigation nodes,
// a subset of which carry semantic payloads (entities, objects, ownership).
// Values are immutable from the caller's perspective: mutating operations
// take a map by value and return the updated copy, so a constructed map can
// be shared read-only across planner and evaluation threads.

namespace sentmap {

using NodeId = std::string;

// true iff non-empty and free of whitespace
bool is_valid_node_id(const std::string& id);

enum class ErrKind {
  DuplicateNodeId,
  DanglingEdge,
  UnknownNode,
  SelfLoop,
  Unreachable,
  MalformedJson,
  SchemaViolation,
  UnknownTarget,
  InvariantBroken,
  BatchFailed,
  InvalidTrace,
  DescriberFailure,
  PayloadInvalid,
  FixtureMissing,
  TransportError,
  NoJsonInReply,
  NoPlanFound,
  UnknownSkill,
  ArityMismatch,
  PlanRejected,
  ModelRefusal,
  AmbiguousTarget,
  TargetNotFound,
  UnresolvableGoal,
  EmptyQuery,
  DuplicateObjectName,
  ConfigError,
};

const char* to_string(ErrKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, std::string message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

enum class EntityState { Open, Closed };

const char* to_string(EntityState s);
std::optional<EntityState> entity_state_from_string(const std::string& s);

enum class Affordance { Openable, Closable, SupportsPlace, SupportsPick };

const char* to_string(Affordance a);
std::optional<Affordance> affordance_from_string(const std::string& s);

// Free-form string metadata. Unknown JSON fields are folded in here on
// parse so that operator enrichment survives round-trips.
using Attributes = std::map<std::string, std::string>;

struct ObjectItem {
  std::string name;
  std::string category;
  std::optional<std::string> owner;
  Attributes attributes;

  bool operator==(const ObjectItem&) const = default;
};

struct Entity {
  std::string name;
  std::string kind;
  std::optional<EntityState> state;
  std::set<Affordance> affordances;
  std::vector<ObjectItem> objects;
  Attributes attributes;

  bool operator==(const Entity&) const = default;
};

struct SemanticPayload {
  std::string label;
  std::optional<std::string> description;
  std::vector<Entity> entities;
  Attributes attributes;

  bool operator==(const SemanticPayload&) const = default;
};

struct NavNode {
  NodeId id;
  std::string zone;
  std::vector<NodeId> neighbors;  // directed out-edges, document order
  std::optional<SemanticPayload> semantic;
  Attributes attributes;

  bool operator==(const NavNode&) const = default;
};

struct Person {
  std::string name;
  std::optional<NodeId> location;
  Attributes attributes;

  bool operator==(const Person&) const = default;
};

struct SentMap {
  std::string version = "1";
  std::map<NodeId, NavNode> nodes;
  std::vector<Person> people;
  Attributes attributes;

  bool operator==(const SentMap&) const = default;

  bool has_node(const NodeId& id) const { return nodes.count(id) != 0; }
  const Person* find_person(const std::string& name) const;

  // nodes carrying a semantic payload, in id order
  std::vector<NodeId> semantic_nodes() const;
  size_t object_count() const;
};

// At least one field must be set.
struct ObjectQuery {
  std::optional<std::string> name;
  std::optional<std::string> category;
  std::optional<std::string> owner;

  bool operator==(const ObjectQuery&) const = default;

  bool empty() const { return !name && !category && !owner; }
  bool matches(const ObjectItem& obj) const;
  std::string describe() const;
};

struct FoundObject {
  NodeId node;
  std::string entity;
  ObjectItem object;

  bool operator==(const FoundObject&) const = default;
};

// Inserts a node. Neighbors must already resolve in the map.
// Throws DuplicateNodeId, DanglingEdge.
SentMap add_nav_node(SentMap map, NavNode node);

// Batch insertion: closure is checked after all nodes are in, so nodes may
// reference each other within one batch.
SentMap add_nav_nodes(SentMap map, std::vector<NavNode> batch);

// Adds a directed edge (both directions when bidirectional). Idempotent.
// Throws UnknownNode, SelfLoop.
SentMap add_edge(SentMap map, const NodeId& from, const NodeId& to,
                 bool bidirectional = false);

// Minimal-hop directed path from current to target, inclusive of both
// endpoints. Ties are broken toward the lexicographically smallest next
// node id, so repeated calls return the identical path.
// Throws UnknownNode, Unreachable.
std::vector<NodeId> shortest_path(const SentMap& map, const NodeId& current,
                                  const NodeId& target);

// All matching objects in node-id order (entity and object order as stored
// within a node). Empty result is not an error.
// Throws EmptyQuery when no query field is set.
std::vector<FoundObject> find_object(const SentMap& map,
                                     const ObjectQuery& query);

// Baseline ablation: keeps ids, zones, edges, semantic labels and entity
// name/kind/affordances; removes objects, entity states, descriptions,
// ownership tags, people's locations, and free-form attributes.
SentMap strip_semantics(const SentMap& map);

// Structural invariant check (edge closure, ownership resolution, person
// locations, name uniqueness). Returns human-readable violations; empty
// means the map is valid. map_io layers json-path diagnostics on top.
std::vector<std::string> check_invariants(const SentMap& map);

}  // namespace sentmap
