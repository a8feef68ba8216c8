#include "bcs/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bcs {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("file", "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>(), 1);
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  throw ScenarioError("distance", "rationals are integers or \"a/b\" strings");
}

DistanceFunction distance_from_json(const json& j, const SpacePtr& space,
                                    const std::string& base_dir) {
  if (j.is_string()) {
    std::string kind = j.get<std::string>();
    if (kind == "hamming") return HammingDistance{};
    throw ScenarioError("prior.distance", "unknown distance kind " + kind);
  }
  if (j.is_object() && j.empty()) return HammingDistance{};  // the default
  if (j.contains("file")) {
    std::string path = j.at("file").get<std::string>();
    if (!base_dir.empty() && path.front() != '/')
      path = base_dir + "/" + path;
    UpdateStructure u = parse_distance_table(read_file(path));
    if (u.space->worlds != space->worlds || !(u.space->vocab == space->vocab))
      throw ScenarioError("prior.distance.file",
                          "distance table universe mismatch");
    return u.dist;
  }
  if (j.contains("weights")) {
    WeightedHammingDistance wh;
    for (int i = 0; i < space->vocab.size(); ++i) {
      std::string name = space->vocab.at(i).display();
      if (!j.at("weights").contains(name))
        throw ScenarioError("prior.distance.weights", "missing atom " + name);
      wh.weights.push_back(rational_from_json(j.at("weights").at(name)));
    }
    return wh;
  }
  if (j.contains("matrix") && !j.contains("order")) {
    NumericMatrixDistance nm;
    const int n = space->size();
    nm.entries.assign(static_cast<size_t>(n),
                      std::vector<Rational>(static_cast<size_t>(n)));
    for (World a : space->worlds)
      for (World b : space->worlds) {
        std::string sa = world_to_string(a, space->vocab.size());
        std::string sb = world_to_string(b, space->vocab.size());
        nm.entries[static_cast<size_t>(space->index_of(a))]
                  [static_cast<size_t>(space->index_of(b))] =
            rational_from_json(j.at("matrix").at(sa).at(sb));
      }
    return nm;
  }
  if (j.contains("matrix")) {
    PosetMatrixDistance pm;
    pm.labels.push_back("0");
    auto label_id = [&](const std::string& s) {
      for (size_t i = 0; i < pm.labels.size(); ++i)
        if (pm.labels[i] == s) return static_cast<int>(i);
      pm.labels.push_back(s);
      return static_cast<int>(pm.labels.size() - 1);
    };
    const int n = space->size();
    pm.entries.assign(static_cast<size_t>(n),
                      std::vector<int>(static_cast<size_t>(n), 0));
    for (World a : space->worlds)
      for (World b : space->worlds) {
        std::string sa = world_to_string(a, space->vocab.size());
        std::string sb = world_to_string(b, space->vocab.size());
        pm.entries[static_cast<size_t>(space->index_of(a))]
                  [static_cast<size_t>(space->index_of(b))] =
            label_id(j.at("matrix").at(sa).at(sb).get<std::string>());
      }
    const int k = static_cast<int>(pm.labels.size());
    pm.less.assign(static_cast<size_t>(k),
                   std::vector<bool>(static_cast<size_t>(k), false));
    for (const auto& decl : j.at("order")) {
      std::istringstream ls(decl.get<std::string>());
      std::string a, lt, b;
      ls >> a >> lt >> b;
      if (lt != "<")
        throw ScenarioError("prior.distance.order", "expected \"a < b\"");
      pm.less[static_cast<size_t>(label_id(a))]
             [static_cast<size_t>(label_id(b))] = true;
    }
    for (int i = 1; i < k; ++i) pm.less[0][static_cast<size_t>(i)] = true;
    for (int m = 0; m < k; ++m)
      for (int i = 0; i < k; ++i)
        if (pm.less[static_cast<size_t>(i)][static_cast<size_t>(m)])
          for (int l = 0; l < k; ++l)
            if (pm.less[static_cast<size_t>(m)][static_cast<size_t>(l)])
              pm.less[static_cast<size_t>(i)][static_cast<size_t>(l)] = true;
    return pm;
  }
  throw ScenarioError("prior.distance", "unrecognized distance spec");
}

}  // namespace

Scenario Scenario::from_json_text(const std::string& text,
                                  const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ScenarioError("json", e.what());
  }
  Scenario s;
  if (!j.contains("vocabulary"))
    throw ScenarioError("vocabulary", "missing");
  s.vocab = Vocabulary::from_names(
      j.at("vocabulary").get<std::vector<std::string>>());
  if (j.contains("theory"))
    for (const auto& f : j.at("theory"))
      s.theory.formulas.push_back(
          parse_formula(f.get<std::string>(), s.vocab));
  s.space = WorldSpace::make(s.vocab, s.theory);

  std::string mode = j.value("mode", "revision");
  if (mode == "revision") s.mode = ScenarioMode::Revision;
  else if (mode == "update") s.mode = ScenarioMode::Update;
  else if (mode == "simulate") s.mode = ScenarioMode::Simulate;
  else throw ScenarioError("mode", "unknown mode " + mode);

  if (j.contains("cap")) s.cap = j.at("cap").get<std::int64_t>();

  if (!j.contains("prior")) throw ScenarioError("prior", "missing");
  const json& prior = j.at("prior");
  if (prior.contains("ranked")) {
    std::vector<std::int64_t> rank(static_cast<size_t>(s.space->size()), 0);
    for (auto it = prior.at("ranked").begin(); it != prior.at("ranked").end();
         ++it) {
      World w = world_from_string(it.key());
      int idx = s.space->index_of(w);
      if (idx < 0)
        throw ScenarioError("prior.ranked",
                            "world " + it.key() + " outside the universe");
      rank[static_cast<size_t>(idx)] = it.value().get<std::int64_t>();
    }
    s.ranking = RevisionRanking(s.space, std::move(rank));
  } else if (prior.contains("distance")) {
    UpdateStructure u;
    u.space = s.space;
    u.dist = distance_from_json(prior.at("distance"), s.space, base_dir);
    s.structure = std::move(u);
  } else {
    throw ScenarioError("prior", "needs \"ranked\" or \"distance\"");
  }

  if (s.mode == ScenarioMode::Revision && !s.ranking)
    throw ScenarioError("prior", "revision mode needs a ranked prior");
  if (s.mode == ScenarioMode::Update && !s.structure)
    throw ScenarioError("prior", "update mode needs a distance prior");

  if (j.contains("initial_belief")) {
    if (s.mode != ScenarioMode::Update)
      throw ScenarioError("initial_belief", "only meaningful in update mode");
    s.initial_belief =
        parse_formula(j.at("initial_belief").get<std::string>(), s.vocab);
  } else if (s.mode == ScenarioMode::Update) {
    throw ScenarioError("initial_belief", "update mode needs one");
  }

  if (j.contains("observations"))
    for (const auto& o : j.at("observations"))
      s.observations.push_back(parse_formula(o.get<std::string>(), s.vocab));

  s.horizon = j.value("horizon", static_cast<int>(s.observations.size()));
  if (s.horizon < static_cast<int>(s.observations.size()))
    throw ScenarioError("horizon", "shorter than the observation list");

  if (j.contains("alphabet"))
    for (const auto& a : j.at("alphabet"))
      s.alphabet.push_back(parse_formula(a.get<std::string>(), s.vocab));
  if (s.alphabet.empty()) {
    // Default: every literal plus true.
    s.alphabet.push_back(Formula::truth());
    for (int i = 0; i < s.vocab.size(); ++i) {
      s.alphabet.push_back(Formula::atom(s.vocab.at(i)));
      s.alphabet.push_back(Formula::negate(Formula::atom(s.vocab.at(i))));
    }
  }
  if (s.mode == ScenarioMode::Simulate) {
    for (const Formula& o : s.observations) {
      bool in_alphabet = false;
      for (const Formula& a : s.alphabet)
        if (a.same_as(o)) in_alphabet = true;
      if (!in_alphabet)
        throw ScenarioError("observations",
                            "simulate-mode observation " + o.print() +
                                " is outside the alphabet");
    }
  }
  return s;
}

std::vector<StepReport> run_scenario(const Scenario& s) {
  std::vector<StepReport> out;
  std::optional<SystemModel> sys;
  if (s.mode == ScenarioMode::Simulate) {
    if (s.ranking)
      sys = build_revision_system(*s.ranking, s.alphabet, s.horizon, s.cap);
    else
      sys = build_update_system(*s.structure, s.alphabet, s.horizon, s.cap);
  }

  auto belief_at = [&](size_t upto) -> BeliefSet {
    std::vector<Formula> prefix(s.observations.begin(),
                                s.observations.begin() +
                                    static_cast<std::ptrdiff_t>(upto));
    switch (s.mode) {
      case ScenarioMode::Revision:
        return epistemic_bs(*s.ranking, prefix);
      case ScenarioMode::Update:
        return km_update_seq(*s.structure,
                             BeliefSet::from_formula(s.space, *s.initial_belief),
                             prefix);
      case ScenarioMode::Simulate:
        return bel(*sys, prefix);
    }
    return BeliefSet::inconsistent(s.space);
  };

  std::vector<World> prev;
  for (size_t m = 0; m <= s.observations.size(); ++m) {
    BeliefSet b = belief_at(m);
    StepReport r;
    r.step = static_cast<int>(m);
    if (m > 0) r.observation = s.observations[m - 1].print();
    r.belief_worlds = b.worlds();
    r.belief_formula = b.char_formula().print();
    r.inconsistent = b.empty();
    if (m > 0)
      r.surprising =
          intersect_worlds(prev, b.worlds()).empty() && !prev.empty();
    prev = b.worlds();
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::string scenario_header(const Scenario& s) {
  std::string mode = s.mode == ScenarioMode::Revision ? "revision"
                     : s.mode == ScenarioMode::Update ? "update"
                                                      : "simulate";
  std::string out = "# " + mode + " scenario ; prior = ";
  if (s.ranking)
    out += "ranked";
  else
    out += "distance(" + s.structure->dist_kind() + ")";
  return out;
}

}  // namespace

std::string render_report_text(const Scenario& s,
                               const std::vector<StepReport>& reports) {
  std::ostringstream os;
  os << scenario_header(s) << '\n';
  const int n = s.vocab.size();
  for (const StepReport& r : reports) {
    os << "step " << r.step;
    if (r.step > 0) os << ": obs = " << r.observation;
    os << " ; worlds = {";
    for (size_t i = 0; i < r.belief_worlds.size(); ++i)
      os << (i ? "," : "") << world_to_string(r.belief_worlds[i], n);
    os << "} ; formula = " << r.belief_formula << " ; flags =";
    if (r.surprising) os << " surprising";
    if (r.inconsistent) os << " inconsistent";
    os << '\n';
  }
  return os.str();
}

std::string render_report_json(const Scenario& s,
                               const std::vector<StepReport>& reports) {
  json doc;
  doc["mode"] = s.mode == ScenarioMode::Revision ? "revision"
                : s.mode == ScenarioMode::Update ? "update"
                                                 : "simulate";
  if (s.structure) doc["distance"] = s.structure->dist_kind();
  json arr = json::array();
  const int n = s.vocab.size();
  for (const StepReport& r : reports) {
    json o;
    o["step"] = r.step;
    if (r.step > 0) o["observation"] = r.observation;
    json ws = json::array();
    for (World w : r.belief_worlds) ws.push_back(world_to_string(w, n));
    o["belief_worlds"] = ws;
    o["belief_formula"] = r.belief_formula;
    o["surprising"] = r.surprising;
    o["inconsistent"] = r.inconsistent;
    arr.push_back(o);
  }
  doc["steps"] = arr;
  return doc.dump(2) + "\n";
}

RankedMeasure parse_ranked_table(const std::string& text,
                                 const SpacePtr& space) {
  RankedMeasure m;
  m.rank.assign(static_cast<size_t>(space->size()), kInfRank);
  std::istringstream in(text);
  std::string bits, rank;
  while (in >> bits >> rank) {
    int idx = space->index_of(world_from_string(bits));
    if (idx < 0) throw std::invalid_argument("world outside universe: " + bits);
    m.rank[static_cast<size_t>(idx)] =
        rank == "inf" ? kInfRank : std::stoll(rank);
  }
  return m;
}

PreferenceMeasure parse_preference_table(const std::string& text,
                                         const SpacePtr& space) {
  std::vector<std::pair<int, int>> edges;
  std::istringstream in(text);
  std::string a, lt, b;
  while (in >> a >> lt >> b) {
    if (lt != "<") throw std::invalid_argument("expected \"a < b\" lines");
    int ia = space->index_of(world_from_string(a));
    int ib = space->index_of(world_from_string(b));
    if (ia < 0 || ib < 0)
      throw std::invalid_argument("world outside universe in edge");
    edges.emplace_back(ia, ib);
  }
  return PreferenceMeasure::from_edges(space->size(), edges);
}

}  // namespace bcs
