#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bcs/kernel.hpp"
#include "bcs/revision.hpp"
#include "bcs/systems.hpp"
#include "bcs/update.hpp"

namespace bcs {

struct ScenarioError : std::runtime_error {
  std::string field;
  ScenarioError(std::string field_, const std::string& what)
      : std::runtime_error(field_ + ": " + what), field(std::move(field_)) {}
};

enum class ScenarioMode { Revision, Update, Simulate };

// A declarative problem instance: vocabulary, prior, observations.
struct Scenario {
  Vocabulary vocab{std::vector<Atom>{}};
  Theory theory;
  ScenarioMode mode = ScenarioMode::Revision;
  SpacePtr space;

  std::optional<RevisionRanking> ranking;       // ranked prior
  std::optional<UpdateStructure> structure;     // distance prior
  std::optional<Formula> initial_belief;        // update mode
  std::vector<Formula> observations;
  int horizon = 0;                              // simulate mode
  std::vector<Formula> alphabet;                // simulate mode
  std::int64_t cap = 1000000;

  static Scenario from_json_text(const std::string& text,
                                 const std::string& base_dir = "");
};

struct StepReport {
  int step = 0;
  std::string observation;  // empty at step 0
  std::vector<World> belief_worlds;
  std::string belief_formula;
  bool surprising = false;
  bool inconsistent = false;
};

std::vector<StepReport> run_scenario(const Scenario& s);

std::string render_report_text(const Scenario& s,
                               const std::vector<StepReport>& reports);
std::string render_report_json(const Scenario& s,
                               const std::vector<StepReport>& reports);

// "<bits> <rank>" lines or "<a> < <b>" lines over world bitstrings.
RankedMeasure parse_ranked_table(const std::string& text, const SpacePtr& space);
PreferenceMeasure parse_preference_table(const std::string& text,
                                         const SpacePtr& space);

}  // namespace bcs
