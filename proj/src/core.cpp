#include "sentmap/core.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace sentmap {

bool is_valid_node_id(const std::string& id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

const char* to_string(ErrKind kind) {
  switch (kind) {
    case ErrKind::DuplicateNodeId: return "duplicate-node-id";
    case ErrKind::DanglingEdge: return "dangling-edge";
    case ErrKind::UnknownNode: return "unknown-node";
    case ErrKind::SelfLoop: return "self-loop";
    case ErrKind::Unreachable: return "unreachable";
    case ErrKind::MalformedJson: return "malformed-json";
    case ErrKind::SchemaViolation: return "schema-violation";
    case ErrKind::UnknownTarget: return "unknown-target";
    case ErrKind::InvariantBroken: return "invariant-broken";
    case ErrKind::BatchFailed: return "batch-failed";
    case ErrKind::InvalidTrace: return "invalid-trace";
    case ErrKind::DescriberFailure: return "describer-failure";
    case ErrKind::PayloadInvalid: return "payload-invalid";
    case ErrKind::FixtureMissing: return "fixture-missing";
    case ErrKind::TransportError: return "transport-error";
    case ErrKind::NoJsonInReply: return "no-json-in-reply";
    case ErrKind::NoPlanFound: return "no-plan-found";
    case ErrKind::UnknownSkill: return "unknown-skill";
    case ErrKind::ArityMismatch: return "arity-mismatch";
    case ErrKind::PlanRejected: return "plan-rejected";
    case ErrKind::ModelRefusal: return "model-refusal";
    case ErrKind::AmbiguousTarget: return "ambiguous-target";
    case ErrKind::TargetNotFound: return "target-not-found";
    case ErrKind::UnresolvableGoal: return "unresolvable-goal";
    case ErrKind::EmptyQuery: return "empty-query";
    case ErrKind::DuplicateObjectName: return "duplicate-object-name";
    case ErrKind::ConfigError: return "config-error";
  }
  return "unknown-error";
}

const char* to_string(EntityState s) {
  return s == EntityState::Open ? "open" : "closed";
}

std::optional<EntityState> entity_state_from_string(const std::string& s) {
  if (s == "open") return EntityState::Open;
  if (s == "closed") return EntityState::Closed;
  return std::nullopt;
}

const char* to_string(Affordance a) {
  switch (a) {
    case Affordance::Openable: return "openable";
    case Affordance::Closable: return "closable";
    case Affordance::SupportsPlace: return "supports-place";
    case Affordance::SupportsPick: return "supports-pick";
  }
  return "?";
}

std::optional<Affordance> affordance_from_string(const std::string& s) {
  if (s == "openable") return Affordance::Openable;
  if (s == "closable") return Affordance::Closable;
  if (s == "supports-place") return Affordance::SupportsPlace;
  if (s == "supports-pick") return Affordance::SupportsPick;
  return std::nullopt;
}

const Person* SentMap::find_person(const std::string& name) const {
  for (const auto& p : people) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<NodeId> SentMap::semantic_nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, node] : nodes) {
    if (node.semantic) out.push_back(id);
  }
  return out;
}

size_t SentMap::object_count() const {
  size_t n = 0;
  for (const auto& [id, node] : nodes) {
    if (!node.semantic) continue;
    for (const auto& e : node.semantic->entities) n += e.objects.size();
  }
  return n;
}

bool ObjectQuery::matches(const ObjectItem& obj) const {
  if (name && obj.name != *name) return false;
  if (category && obj.category != *category) return false;
  if (owner && (!obj.owner || *obj.owner != *owner)) return false;
  return true;
}

std::string ObjectQuery::describe() const {
  std::ostringstream os;
  const char* sep = "";
  if (name) { os << sep << "name=" << *name; sep = ", "; }
  if (category) { os << sep << "category=" << *category; sep = ", "; }
  if (owner) { os << sep << "owner=" << *owner; sep = ", "; }
  return os.str();
}

SentMap add_nav_node(SentMap map, NavNode node) {
  return add_nav_nodes(std::move(map), {std::move(node)});
}

SentMap add_nav_nodes(SentMap map, std::vector<NavNode> batch) {
  for (auto& node : batch) {
    if (!is_valid_node_id(node.id)) {
      throw Error(ErrKind::SchemaViolation,
                  "node id must be non-empty without whitespace: '" + node.id +
                      "'");
    }
    if (map.has_node(node.id)) {
      throw Error(ErrKind::DuplicateNodeId, node.id);
    }
    map.nodes.emplace(node.id, std::move(node));
  }
  for (const auto& [id, node] : map.nodes) {
    for (const auto& nb : node.neighbors) {
      if (nb == id) throw Error(ErrKind::SelfLoop, id);
      if (!map.has_node(nb)) throw Error(ErrKind::DanglingEdge, nb);
    }
  }
  return map;
}

SentMap add_edge(SentMap map, const NodeId& from, const NodeId& to,
                 bool bidirectional) {
  if (!map.has_node(from)) throw Error(ErrKind::UnknownNode, from);
  if (!map.has_node(to)) throw Error(ErrKind::UnknownNode, to);
  if (from == to) throw Error(ErrKind::SelfLoop, from);

  auto link = [&map](const NodeId& a, const NodeId& b) {
    auto& nbs = map.nodes.at(a).neighbors;
    if (std::find(nbs.begin(), nbs.end(), b) == nbs.end()) nbs.push_back(b);
  };
  link(from, to);
  if (bidirectional) link(to, from);
  return map;
}

std::vector<NodeId> shortest_path(const SentMap& map, const NodeId& current,
                                  const NodeId& target) {
  if (!map.has_node(current)) throw Error(ErrKind::UnknownNode, current);
  if (!map.has_node(target)) throw Error(ErrKind::UnknownNode, target);
  if (current == target) return {current};

  // Hop distance to target over reversed edges, then walk forward greedily
  // picking the smallest next id that still decreases the distance. The
  // greedy walk yields the lexicographically smallest minimal-hop path.
  std::map<NodeId, std::vector<NodeId>> reverse;
  for (const auto& [id, node] : map.nodes) {
    for (const auto& nb : node.neighbors) reverse[nb].push_back(id);
  }
  std::map<NodeId, size_t> dist;
  dist[target] = 0;
  std::deque<NodeId> frontier{target};
  while (!frontier.empty()) {
    NodeId v = frontier.front();
    frontier.pop_front();
    auto it = reverse.find(v);
    if (it == reverse.end()) continue;
    for (const auto& u : it->second) {
      if (dist.count(u)) continue;
      dist[u] = dist[v] + 1;
      frontier.push_back(u);
    }
  }
  if (!dist.count(current)) {
    throw Error(ErrKind::Unreachable, current + " -> " + target);
  }

  std::vector<NodeId> path{current};
  NodeId at = current;
  while (at != target) {
    size_t remaining = dist.at(at);
    const NodeId* best = nullptr;
    for (const auto& nb : map.nodes.at(at).neighbors) {
      auto it = dist.find(nb);
      if (it == dist.end() || it->second + 1 != remaining) continue;
      if (!best || nb < *best) best = &nb;
    }
    // dist guarantees a successor exists
    at = *best;
    path.push_back(at);
  }
  return path;
}

std::vector<FoundObject> find_object(const SentMap& map,
                                     const ObjectQuery& query) {
  if (query.empty()) {
    throw Error(ErrKind::EmptyQuery,
                "object query needs at least one of name/category/owner");
  }
  std::vector<FoundObject> out;
  for (const auto& [id, node] : map.nodes) {
    if (!node.semantic) continue;
    for (const auto& entity : node.semantic->entities) {
      for (const auto& obj : entity.objects) {
        if (query.matches(obj)) out.push_back({id, entity.name, obj});
      }
    }
  }
  return out;
}

SentMap strip_semantics(const SentMap& map) {
  SentMap out;
  out.version = map.version;
  for (const auto& [id, node] : map.nodes) {
    NavNode stripped;
    stripped.id = node.id;
    stripped.zone = node.zone;
    stripped.neighbors = node.neighbors;
    if (node.semantic) {
      SemanticPayload payload;
      payload.label = node.semantic->label;
      for (const auto& entity : node.semantic->entities) {
        Entity e;
        e.name = entity.name;
        e.kind = entity.kind;
        e.affordances = entity.affordances;
        payload.entities.push_back(std::move(e));
      }
      stripped.semantic = std::move(payload);
    }
    out.nodes.emplace(id, std::move(stripped));
  }
  for (const auto& person : map.people) {
    out.people.push_back(Person{person.name, std::nullopt, {}});
  }
  return out;
}

std::vector<std::string> check_invariants(const SentMap& map) {
  std::vector<std::string> issues;
  for (const auto& [id, node] : map.nodes) {
    if (!is_valid_node_id(id)) {
      issues.push_back("invalid node id '" + id + "'");
    }
    if (node.id != id) {
      issues.push_back("node keyed '" + id + "' carries id '" + node.id + "'");
    }
    for (const auto& nb : node.neighbors) {
      if (nb == id) issues.push_back("self-loop at '" + id + "'");
      else if (!map.has_node(nb)) {
        issues.push_back("edge from '" + id + "' to missing node '" + nb + "'");
      }
    }
    if (!node.semantic) continue;
    std::set<std::string> entity_names;
    for (const auto& entity : node.semantic->entities) {
      if (!entity_names.insert(entity.name).second) {
        issues.push_back("duplicate entity '" + entity.name + "' at '" + id +
                         "'");
      }
      if (entity.state &&
          (!entity.affordances.count(Affordance::Openable) ||
           !entity.affordances.count(Affordance::Closable))) {
        issues.push_back("stateful entity '" + entity.name + "' at '" + id +
                         "' lacks openable/closable affordances");
      }
      std::set<std::string> object_names;
      for (const auto& obj : entity.objects) {
        if (!object_names.insert(obj.name).second) {
          issues.push_back("duplicate object '" + obj.name + "' in entity '" +
                           entity.name + "' at '" + id + "'");
        }
        if (obj.owner && !map.find_person(*obj.owner)) {
          issues.push_back("object '" + obj.name + "' owned by undeclared "
                           "person '" + *obj.owner + "'");
        }
      }
    }
  }
  std::set<std::string> person_names;
  for (const auto& person : map.people) {
    if (!person_names.insert(person.name).second) {
      issues.push_back("duplicate person '" + person.name + "'");
    }
    if (person.location && !map.has_node(*person.location)) {
      issues.push_back("person '" + person.name + "' located at missing node '" +
                       *person.location + "'");
    }
  }
  return issues;
}

}  // namespace sentmap
