#pragma once

// Shared scaffolding for the test suites: fixture paths and a small
// galley map that is quicker to reason about than the full reference
// environment.

#include <fstream>
#include <sstream>
#include <string>

#include "sentmap/core.hpp"

#ifndef SENTMAP_FIXTURE_DIR
#define SENTMAP_FIXTURE_DIR "fixtures"
#endif

namespace testutil {

inline std::string fixture_path(const std::string& rel) {
  return std::string(SENTMAP_FIXTURE_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string fixture(const std::string& rel) {
  return slurp(fixture_path(rel));
}

// dock -- counter -- cold_store; a bench with a mug and a spoon, a
// closed fridge holding Dana's juice, Dana standing at the counter.
inline sentmap::SentMap galley_map() {
  using namespace sentmap;

  NavNode dock;
  dock.id = "dock";
  dock.zone = "bay";

  NavNode counter;
  counter.id = "counter";
  counter.zone = "galley";
  {
    SemanticPayload payload;
    payload.label = "galley counter";
    Entity bench;
    bench.name = "bench";
    bench.kind = "table";
    bench.affordances = {Affordance::SupportsPlace, Affordance::SupportsPick};
    ObjectItem mug;
    mug.name = "mug";
    mug.category = "cup";
    ObjectItem spoon;
    spoon.name = "spoon";
    spoon.category = "cutlery";
    bench.objects = {mug, spoon};
    payload.entities = {bench};
    counter.semantic = payload;
  }

  NavNode cold;
  cold.id = "cold_store";
  cold.zone = "galley";
  {
    SemanticPayload payload;
    payload.label = "cold store";
    Entity fridge;
    fridge.name = "fridge";
    fridge.kind = "fridge";
    fridge.state = EntityState::Closed;
    fridge.affordances = {Affordance::Openable, Affordance::Closable,
                          Affordance::SupportsPlace, Affordance::SupportsPick};
    ObjectItem juice;
    juice.name = "juice";
    juice.category = "drink";
    juice.owner = "Dana";
    fridge.objects = {juice};
    payload.entities = {fridge};
    cold.semantic = payload;
  }

  SentMap map;
  map = add_nav_nodes(std::move(map), {dock, counter, cold});
  map = add_edge(std::move(map), "dock", "counter", true);
  map = add_edge(std::move(map), "counter", "cold_store", true);

  Person dana;
  dana.name = "Dana";
  dana.location = "counter";
  map.people = {dana};
  return map;
}

}  // namespace testutil
