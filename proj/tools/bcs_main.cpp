#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bcs/diagnosis.hpp"
#include "bcs/scenario.hpp"

namespace {

using namespace bcs;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string dir_of(const std::string& path) {
  auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path);
  out << text;
}

Scenario load_scenario(const std::string& path, std::int64_t cap_override) {
  Scenario s = Scenario::from_json_text(read_file(path), dir_of(path));
  if (cap_override > 0) s.cap = cap_override;
  return s;
}

int report_exit(const CheckReport& rep, const std::string& out_path) {
  std::ostringstream os;
  if (rep.pass) {
    os << "pass\n";
  } else {
    for (const auto& f : rep.findings)
      os << "violation " << f.property << ": " << f.witness << '\n';
  }
  for (const auto& n : rep.notes) os << "note: " << n << '\n';
  std::cout << os.str();
  if (!out_path.empty()) {
    std::ostringstream doc;
    doc << "{\n  \"pass\": " << (rep.pass ? "true" : "false")
        << ",\n  \"findings\": [";
    for (size_t i = 0; i < rep.findings.size(); ++i) {
      if (i) doc << ',';
      doc << "\n    {\"property\": \"" << rep.findings[i].property
          << "\", \"witness\": \"" << rep.findings[i].witness << "\"}";
    }
    doc << (rep.findings.empty() ? "]" : "\n  ]") << "\n}\n";
    write_out(out_path, doc.str());
  }
  return rep.pass ? 0 : 1;
}

std::vector<Formula> load_obs_file(const std::string& path,
                                   const Vocabulary& vocab) {
  std::vector<Formula> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_formula(line, vocab));
  }
  return out;
}

SystemModel build_from_scenario(const Scenario& s) {
  if (s.ranking)
    return build_revision_system(*s.ranking, s.alphabet, s.horizon, s.cap);
  return build_update_system(*s.structure, s.alphabet, s.horizon, s.cap);
}

int run_repl(const Scenario& base) {
  Scenario s = base;
  if (!s.observations.empty()) {
    std::cerr << "repl needs a scenario without observations\n";
    return 2;
  }
  std::string line;
  auto print_last = [&]() {
    auto reports = run_scenario(s);
    std::ostringstream os;
    const StepReport& r = reports.back();
    os << "step " << r.step;
    if (r.step > 0) os << ": obs = " << r.observation;
    os << " ; worlds = {";
    for (size_t i = 0; i < r.belief_worlds.size(); ++i)
      os << (i ? "," : "")
         << world_to_string(r.belief_worlds[i], s.vocab.size());
    os << "} ; formula = " << r.belief_formula << " ; flags =";
    if (r.surprising) os << " surprising";
    if (r.inconsistent) os << " inconsistent";
    std::cout << os.str() << '\n';
  };
  print_last();
  while (std::getline(std::cin, line)) {
    if (line == ":quit") break;
    if (line == ":undo") {
      if (!s.observations.empty()) {
        s.observations.pop_back();
        if (s.mode == ScenarioMode::Simulate) --s.horizon;
      }
      print_last();
      continue;
    }
    if (line == ":worlds") {
      auto reports = run_scenario(s);
      const StepReport& r = reports.back();
      std::cout << "{";
      for (size_t i = 0; i < r.belief_worlds.size(); ++i)
        std::cout << (i ? "," : "")
                  << world_to_string(r.belief_worlds[i], s.vocab.size());
      std::cout << "}\n";
      continue;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Formula f = parse_formula(line, s.vocab);
      if (s.mode == ScenarioMode::Simulate) {
        bool in_alphabet = false;
        for (const Formula& a : s.alphabet)
          if (a.same_as(f)) in_alphabet = true;
        if (!in_alphabet) {
          std::cout << "error: observation outside the alphabet\n";
          continue;
        }
        ++s.horizon;
      }
      s.observations.push_back(std::move(f));
      print_last();
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"belief change engine"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, oracle_spec = "grove",
              structure_path, circuit_path, obs_path, measure_path,
              k_formula;
  std::uint64_t seed = 1;
  std::int64_t cap = 0;  // 0 keeps the scenario value
  int depth = 2;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "scenario file");
    cmd->add_option("--out", out_path, "machine-readable output file");
    cmd->add_option("--seed", seed, "seed for sampled checks");
    cmd->add_option("--cap", cap, "state-space cap");
  };

  CLI::App* c_revise = app.add_subcommand("revise", "run a revision scenario");
  CLI::App* c_update = app.add_subcommand("update", "run an update scenario");
  CLI::App* c_sim = app.add_subcommand("simulate", "run a run-system scenario");
  for (auto* c : {c_revise, c_update, c_sim}) add_common(c);

  CLI::App* c_check = app.add_subcommand("check", "postulate/condition checks");
  std::string kind;
  c_check->add_option("kind", kind,
                      "agm|agm-primed|km|klm|qualitative|bcs|rev|upd|"
                      "prev-rule|prop24|prop71|lemA8|thm64")
      ->required();
  add_common(c_check);
  c_check->add_option("--oracle", oracle_spec,
                      "grove|drastic|fullmeet|suffix|raw|stubborn|table:<file>");
  c_check->add_option("--structure", structure_path,
                      "update structure (json scenario or distance table)");
  c_check->add_option("--circuit", circuit_path, "circuit file");
  c_check->add_option("--obs", obs_path, "observation file");
  c_check->add_option("--measure", measure_path, "measure table file");
  c_check->add_option("--k", k_formula, "belief set formula for agm checks");
  c_check->add_option("--depth", depth, "sequence depth for agm-primed");

  CLI::App* c_statify = app.add_subcommand("statify", "timestamp a system");
  add_common(c_statify);

  CLI::App* c_diag = app.add_subcommand("diagnose", "diagnosis trace");
  c_diag->add_option("--circuit", circuit_path, "circuit file")->required();
  c_diag->add_option("--obs", obs_path, "observation file")->required();
  c_diag->add_option("--out", out_path, "output file");

  CLI::App* c_repl = app.add_subcommand("repl", "interactive session");
  add_common(c_repl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_revise || *c_update || *c_sim) {
      Scenario s = load_scenario(scenario_path, cap);
      ScenarioMode want = *c_revise ? ScenarioMode::Revision
                          : *c_update ? ScenarioMode::Update
                                      : ScenarioMode::Simulate;
      if (s.mode != want) throw ScenarioError("mode", "does not match command");
      auto reports = run_scenario(s);
      std::cout << render_report_text(s, reports);
      write_out(out_path, render_report_json(s, reports));
      return 0;
    }

    if (*c_repl) return run_repl(load_scenario(scenario_path, cap));

    if (*c_diag) {
      Circuit c = parse_circuit(read_file(circuit_path));
      auto obs = load_obs_file(obs_path, c.vocabulary());
      std::ostringstream os;
      std::set<FaultSet> prev;
      for (size_t m = 0; m <= obs.size(); ++m) {
        std::vector<Formula> prefix(obs.begin(),
                                    obs.begin() + static_cast<std::ptrdiff_t>(m));
        auto d = diagnoses(c, prefix);
        os << "step " << m;
        if (m > 0) os << ": obs = " << obs[m - 1].print();
        os << " ; diagnoses =";
        for (const auto& f : d) os << ' ' << fault_set_str(c, f);
        if (m > 0) {
          std::set<FaultSet> overlap;
          std::set_intersection(prev.begin(), prev.end(), d.begin(), d.end(),
                                std::inserter(overlap, overlap.begin()));
          if (overlap.empty()) os << " ; flags = surprising";
        }
        os << '\n';
        prev = d;
      }
      std::cout << os.str();
      write_out(out_path, os.str());
      return 0;
    }

    if (*c_statify) {
      Scenario s = load_scenario(scenario_path, cap);
      SystemModel sys = build_from_scenario(s);
      SystemModel star = statify(sys);
      std::string text = dump_system(star);
      std::cout << text;
      write_out(out_path, text);
      return 0;
    }

    if (*c_check) {
      if (kind == "agm" || kind == "agm-primed") {
        Scenario s = load_scenario(scenario_path, cap);
        if (!s.ranking)
          throw ScenarioError("prior", "agm checks need a ranked prior");
        if (kind == "agm") {
          RevisionOracle oracle;
          if (oracle_spec == "grove") oracle = make_grove_oracle(*s.ranking);
          else if (oracle_spec == "drastic") oracle = make_drastic_oracle();
          else if (oracle_spec == "fullmeet") oracle = make_full_meet_oracle();
          else if (oracle_spec.rfind("table:", 0) == 0)
            oracle = make_table_oracle(read_file(oracle_spec.substr(6)),
                                       s.space);
          else throw ScenarioError("oracle", "unknown oracle " + oracle_spec);
          BeliefSet k = k_formula.empty()
                            ? s.ranking->initial_belief()
                            : BeliefSet::from_formula(
                                  s.space, parse_formula(k_formula, s.vocab));
          return report_exit(check_agm(oracle, s.space, k, seed), out_path);
        }
        EpistemicOracle oracle;
        if (oracle_spec == "grove" || oracle_spec == "suffix")
          oracle = make_epistemic_oracle(*s.ranking);
        else if (oracle_spec == "raw")
          oracle = make_raw_conditioning_oracle(*s.ranking);
        else if (oracle_spec == "stubborn")
          oracle = make_stubborn_oracle(*s.ranking);
        else throw ScenarioError("oracle", "unknown oracle " + oracle_spec);
        return report_exit(check_agm_primed(oracle, s.space, depth), out_path);
      }

      if (kind == "km") {
        UpdateStructure u;
        if (structure_path.size() > 5 &&
            structure_path.substr(structure_path.size() - 5) == ".json") {
          Scenario s = load_scenario(structure_path, cap);
          if (!s.structure)
            throw ScenarioError("prior", "km check needs a distance prior");
          u = *s.structure;
        } else {
          u = parse_distance_table(read_file(structure_path));
        }
        auto rep = validate_update_structure(u);
        if (!rep.pass) return report_exit(rep, out_path);
        UpdateOracle oracle = [&u](const std::vector<World>& mu,
                                   std::uint64_t phi_mask) {
          return min_u(u, mu, u.space->unmask(phi_mask));
        };
        return report_exit(check_km(oracle, u.space, seed), out_path);
      }

      if (kind == "klm" || kind == "qualitative") {
        Scenario s = load_scenario(scenario_path, cap);
        IndexSet universe;
        for (int i = 0; i < s.space->size(); ++i) universe.push_back(i);
        CheckReport rep;
        if (!measure_path.empty()) {
          std::string text = read_file(measure_path);
          if (text.find('<') != std::string::npos) {
            auto m = parse_preference_table(text, s.space);
            rep = kind == "klm" ? check_klm(m, universe)
                                : check_qualitative(m, universe);
          } else {
            auto m = parse_ranked_table(text, s.space);
            rep = kind == "klm" ? check_klm(m, universe)
                                : check_qualitative(m, universe);
          }
        } else if (s.ranking) {
          auto m = s.ranking->measure();
          rep = kind == "klm" ? check_klm(m, universe)
                              : check_qualitative(m, universe);
        } else {
          throw ScenarioError("measure", "need a ranked prior or --measure");
        }
        return report_exit(rep, out_path);
      }

      if (kind == "bcs" || kind == "rev" || kind == "upd" ||
          kind == "prev-rule" || kind == "prop71" || kind == "lemA8" ||
          kind == "thm64") {
        Scenario s = load_scenario(scenario_path, cap);
        SystemModel sys = build_from_scenario(s);
        ValidationBounds bounds;
        bounds.seed = seed;
        if (kind == "bcs") return report_exit(validate_bcs(sys), out_path);
        if (kind == "rev")
          return report_exit(validate_rev(sys, bounds), out_path);
        if (kind == "upd")
          return report_exit(validate_upd(sys, bounds), out_path);
        if (kind == "prev-rule")
          return report_exit(check_prev_rule(sys, seed), out_path);
        if (kind == "prop71")
          return report_exit(check_prop_7_1(sys, bounds), out_path);
        if (!s.structure)
          throw ScenarioError("prior", kind + " needs a distance prior");
        if (kind == "lemA8")
          return report_exit(cross_check_update(sys, *s.structure), out_path);
        return report_exit(check_correctness_propagation(sys, *s.structure),
                           out_path);
      }

      if (kind == "prop24") {
        Circuit c = parse_circuit(read_file(circuit_path));
        auto obs = load_obs_file(obs_path, c.vocabulary());
        return report_exit(check_prop_2_4(c, obs), out_path);
      }

      std::cerr << "unknown check kind: " << kind << '\n';
      return 2;
    }
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
