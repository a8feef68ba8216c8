#pragma once

#include <set>
#include <string>
#include <vector>

#include "bcs/kernel.hpp"
#include "bcs/plausibility.hpp"
#include "bcs/systems.hpp"

namespace bcs {

struct CyclicCircuit : std::runtime_error {
  CyclicCircuit() : std::runtime_error("circuit wiring is cyclic") {}
};

enum class GateKind { And, Or, Not, Xor, Nand, Nor };

struct Gate {
  std::string id;                  // component name, fault atom f_<id-num>
  GateKind kind;
  std::vector<std::string> inputs; // line names
  std::string output;
};

// Acyclic gate network; every internal/output line driven by one component.
struct Circuit {
  std::vector<Gate> gates;

  std::vector<std::string> line_names() const;   // sorted, stable
  std::vector<std::string> fault_atoms() const;  // f-atoms, gate order
  std::vector<std::string> line_atoms() const;   // h-atoms, line order
  Vocabulary vocabulary() const;                 // faults then lines
  void validate() const;
};

// One axiom per gate: a healthy gate's output matches its function.
Theory circuit_theory(const Circuit& c);

// Fault set as a set of gate indices.
using FaultSet = std::set<int>;

std::string fault_set_str(const Circuit& c, const FaultSet& f);

// Fault sets that admit, for every observation, a line valuation consistent
// with the theory when exactly those gates are faulty. Faults persist.
std::set<FaultSet> consistent_faults(const Circuit& c,
                                     const std::vector<Formula>& obs);

// The minimum-cardinality members of consistent_faults.
std::set<FaultSet> diagnoses(const Circuit& c,
                             const std::vector<Formula>& obs);

// Step-by-step evolution: a consistent observation filters the diagnosis
// set; a surprising one jumps to the next cardinality level, disjoint from
// and strictly larger than the previous one.
CheckReport check_prop_2_4(const Circuit& c, const std::vector<Formula>& obs);

// The same beliefs through a run system with the fault-cardinality prior.
SystemModel build_diag_system(const Circuit& c,
                              const std::vector<Formula>& obs_alphabet, int T,
                              std::int64_t cap = 1000000);
std::set<FaultSet> diagnoses_via_system(const Circuit& c,
                                        const std::vector<Formula>& obs);

// File format: lines "gate <id> <kind> <in...> -> <out>".
Circuit parse_circuit(const std::string& text);

}  // namespace bcs
