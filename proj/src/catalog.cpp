#include <map>

#include "roe/dsl.hpp"

namespace roe {

namespace {

// All full transfers use a ramp with peak 300 over a width-1 window: the
// integrated drain is 150, leaving a residue of exp(-150) in the source,
// far below every tolerance in the harness. Where one source fans out into
// several targets, each route's peak is the full 300 scaled by that route's
// probability share, so the race between routes splits exactly by share at
// every instant of the window.

const char* kEq1Detector = R"(# A single particle capture: the detector either fires or it does not,
# and the full current drains into the fired branch.
scenario eq1-detector
component c1 weight 1.0 particle psi detector D0 env lab
component c2 weight 0.0 detector D1 env fired
interact capture particle_detector window 0 1
flow capture c1 -> c2 ramp 300
)";

const char* kEq3EntangledObserver = R"(# An observer already conscious of the quiet detector watches it fire.
# The fired branch carries the observer's ready state; the hit lands there
# with certainty and promotes it.
scenario eq3-entangled-observer
observer k
component c1 weight 1.0 particle psi detector D0 env lab brain k conscious B0
component c2 weight 0.0 detector D1 env fired brain k ready B1
interact look physiological observer k window 0 1
flow look c1 -> c2 ramp 300
)";

const char* kEq5TerminalObserver = R"(# The capture already happened (weights 0.36 / 0.64); the observer now
# looks. Both ready branches race for the hit with rates scaled by their
# share, so the split matches the weights exactly.
scenario eq5-terminal-observer
observer k
component c1 weight 0.36 particle psi detector D0 env lab0 brain k x
component c2 weight 0.64 detector D1 env lab1 brain k x
component c3 weight 0.0 particle psi detector D0 env obs0 brain k ready B0
component c4 weight 0.0 detector D1 env obs1 brain k ready B1
interact look physiological observer k window 0 1
flow look c1 -> c3 ramp 108
flow look c2 -> c4 ramp 192
)";

const char* kIntermediateObserver = R"(# The observer looks mid-experiment, then the no-fire branch gets a second
# chance at a capture. The late edge starts as a forbidden ready-to-ready
# transition and only becomes available once its source turned conscious,
# so only the branch that actually saw "no fire" can see the late capture.
scenario intermediate-observer
observer k
component c0 weight 1.0 particle psi env pre brain k x
component c1 weight 0.0 particle psi detector D0 env lab0 brain k x
component c2 weight 0.0 detector D1 env lab1 brain k x
component c3 weight 0.0 particle psi detector D0 env obs0 brain k ready B0
component c4 weight 0.0 detector D1 env obs1 brain k ready B1
component c5 weight 0.0 detector D1 env obs2 brain k ready B1p
interact capture particle_detector window 0 1
interact look physiological observer k window 2 3
interact latecapture physiological observer k window 4 5
flow capture c0 -> c1 ramp 108
flow capture c0 -> c2 ramp 192
flow look c1 -> c3 ramp 108
flow look c2 -> c4 ramp 192
flow latecapture c3 -> c5 ramp 300
)";

const char* kOutsideTerminalObserver = R"(# A second observer looks at a terminal observer. The cross edge from the
# no-fire branch into the fired record would be an anomalous capture (the
# inner observer's ready state jumping to a different ready state) and is
# removed; with it gone the fired record via that path has probability 0.
scenario outside-terminal-observer
observer k
observer w
component c1 weight 0.36 particle psi detector D0 env lab0 brain k ready B0 brain w x
component c2 weight 0.64 detector D1 env lab1 brain k ready B1 brain w x
component c3 weight 0.0 particle psi detector D0 env out0 brain k ready B0 brain w ready W0
component c4 weight 0.0 particle psip detector D1 env out1 brain k ready B1 brain w ready W1
component c5 weight 0.0 detector D1 env out2 brain k ready B1 brain w ready W1
interact look physiological observer w window 0 1
flow look c1 -> c3 ramp 108
flow look c1 -> c4 ramp 45
flow look c2 -> c5 ramp 192
)";

const char* kIntermediateOutsideObserver = R"(# An inner observer looks first, an outer observer then looks at the inner
# one. The outer targets carry the inner observer's conscious state along:
# by the time the second look runs, the inner acquisition already happened
# in every branch that matters.
scenario intermediate-outside-observer
observer k
observer w
component c1 weight 0.36 particle psi detector D0 env lab0 brain k x brain w x
component c2 weight 0.64 detector D1 env lab1 brain k x brain w x
component c3 weight 0.0 particle psi detector D0 env in0 brain k ready B0 brain w x
component c4 weight 0.0 detector D1 env in1 brain k ready B1 brain w x
component c5 weight 0.0 particle psi detector D0 env out0 brain k conscious B0 brain w ready W0
component c6 weight 0.0 detector D1 env out1 brain k conscious B1 brain w ready W1
interact klook physiological observer k window 0 1
interact wlook physiological observer w window 2 3
flow klook c1 -> c3 ramp 108
flow klook c2 -> c4 ramp 192
flow wlook c3 -> c5 ramp 108
flow wlook c4 -> c6 ramp 192
)";

const char* kDriftConsciousness = R"(# Consciousness drifts into one of several ready states with no detector
# involved. Three routes are shipped; the count is illustrative.
scenario drift-consciousness
observer k
component c0 weight 1.0 particle psi env pre brain k x
component c1 weight 0.0 particle psi env da brain k ready Ba
component c2 weight 0.0 particle psi env db brain k ready Bb
component c3 weight 0.0 particle psi env dc brain k ready Bc
interact drift physiological observer k window 0 1
flow drift c0 -> c1 ramp 150
flow drift c0 -> c2 ramp 90
flow drift c0 -> c3 ramp 60
)";

const char* kSequentialInteractions = R"(# A scatter into three detector branches followed by a look. Objective runs
# reduce already at the scatter; observer runs only at the look. The look
# rates are scaled with the same shares the scatter produces, so both orders
# of reduction land on the same outcome statistics.
scenario sequential-interactions
observer k
component c0 weight 1.0 particle psi env pre brain k x
component c1 weight 0.0 detector D0 env s0 brain k x
component c2 weight 0.0 detector D1 env s1 brain k x
component c3 weight 0.0 detector D2 env s2 brain k x
component c4 weight 0.0 detector D0 env o0 brain k ready B0
component c5 weight 0.0 detector D1 env o1 brain k ready B1
component c6 weight 0.0 detector D2 env o2 brain k ready B2
interact scatter particle_detector window 0 1
interact look physiological observer k window 2 3
flow scatter c0 -> c1 ramp 150
flow scatter c0 -> c2 ramp 90
flow scatter c0 -> c3 ramp 60
flow look c1 -> c4 ramp 150
flow look c2 -> c5 ramp 90
flow look c3 -> c6 ramp 60
)";

const char* kCatV1 = R"(# The classic box, with the cat as the only observer. The trigger window
# integrates to ln 2, so half the runs end with the cat aware of the firing
# and half leave the superposition standing at the end of the window.
scenario cat-v1
observer cat
component c1 weight 1.0 particle psi detector D0 env lab brain cat conscious C0
component c2 weight 0.0 detector D1 env fired brain cat ready C1
interact trigger physiological observer cat window 0 1
flow trigger c1 -> c2 const 0.6931471805599453
)";

const char* kCatV1Outside = R"(# The box from outside, starting from the even split the closed box
# produced. Both inner branches share one sealed environment class, so
# nothing can reduce before the box opens; opening promotes the cat's and
# the outside observer's records together.
scenario cat-v1-outside
observer cat
observer w
component c1 weight 0.5 particle psi detector D0 env box brain cat conscious C0 brain w x
component c2 weight 0.5 detector D1 env box brain cat ready C1 brain w x
component c3 weight 0.0 particle psi detector D0 env seen0 brain cat conscious C0 brain w ready W0
component c4 weight 0.0 detector D1 env seen1 brain cat ready C1 brain w ready W1
interact open physiological observer w window 0 1
flow open c1 -> c3 ramp 150
flow open c2 -> c4 ramp 150
)";

const char* kCatV2 = R"(# The sleeping-cat variant: the detector firing starts a device that wakes
# the cat. The device branch has no ready state, so under observer rules
# hits on it do nothing; under objective rules it is a real intermediate
# reduction. Either way the wake-up hit lands on the third component.
scenario cat-v2
observer cat
component c1 weight 1.0 particle psi detector D0 env lab brain cat x
component c2 weight 0.0 detector D1 env dev brain cat x
component c3 weight 0.0 detector D1 env wake brain cat ready C1
interact capture particle_detector window 0 1
interact wake physiological observer cat window 2 3
flow capture c1 -> c2 ramp 300
flow wake c2 -> c3 ramp 300
)";

const char* kCatV2Outside = R"(# The sleeping-cat box from outside. Everything inside shares the sealed
# environment class, so the in-box device step cannot reduce under either
# regime; all records are decided at the opening.
scenario cat-v2-outside
observer cat
observer w
component c1 weight 0.36 particle psi detector D0 env box brain cat x brain w x
component c2 weight 0.64 detector D1 env box brain cat x brain w x
component c3 weight 0.0 detector D1 env box brain cat x brain w x
component c4 weight 0.0 particle psi detector D0 env open0 brain cat x brain w ready W0
component c5 weight 0.0 detector D1 env open1 brain cat ready C1 brain w ready W1
interact devwake detector_detector window 0 1
interact open physiological observer w window 2 3
flow devwake c2 -> c3 ramp 300
flow open c1 -> c4 ramp 108
flow open c3 -> c5 ramp 192
)";

const char* kCatV2Wakeup = R"(# The sleeping cat wakes either naturally (quiet detector) or by the
# device (fired detector); the two wake routes race with rates scaled by
# the branch weights.
scenario cat-v2-wakeup
observer cat
component c1 weight 0.36 particle psi detector D0 env lab brain cat x
component c2 weight 0.64 detector D1 env dev brain cat x
component c3 weight 0.0 particle psi detector D0 env nat brain cat ready CN
component c4 weight 0.0 detector D1 env dw brain cat ready C1
interact wake physiological observer cat window 0 1
flow wake c1 -> c3 ramp 108
flow wake c2 -> c4 ramp 192
)";

const char* kNondemolition = R"(# Label-level shadow of the coherent spin-pair experiment: preparation,
# two detector engagements inside a shared shielded environment, and the
# final join/readout. The two middle hits change nothing under observer
# rules (no ready state) and cannot reduce under objective rules (shared
# environment class), mirroring the amplitude-level module.
scenario nondemolition
observer k
component c0 weight 1.0 particle singlet detector D00raw env virgin brain k x
component c1 weight 0.0 particle singlet detector D00 env prepped brain k ready P0
component c2 weight 0.0 particle singlet detector D10 env prepped brain k conscious P0
component c3 weight 0.0 particle singlet detector D11 env prepped brain k conscious P0
component c4 weight 0.0 particle J2=0 detector D11 env read brain k ready R1
interact prep physiological observer k window 0 1
interact engage1 particle_detector window 2 3
interact engage2 particle_detector window 4 5
interact join physiological observer k window 6 7
flow prep c0 -> c1 ramp 300
flow engage1 c1 -> c2 ramp 300
flow engage2 c2 -> c3 ramp 300
flow join c3 -> c4 ramp 300
)";

const std::map<std::string, const char*>& catalog_map() {
  static const std::map<std::string, const char*> m = {
      {"eq1-detector", kEq1Detector},
      {"eq3-entangled-observer", kEq3EntangledObserver},
      {"eq5-terminal-observer", kEq5TerminalObserver},
      {"intermediate-observer", kIntermediateObserver},
      {"outside-terminal-observer", kOutsideTerminalObserver},
      {"intermediate-outside-observer", kIntermediateOutsideObserver},
      {"drift-consciousness", kDriftConsciousness},
      {"sequential-interactions", kSequentialInteractions},
      {"cat-v1", kCatV1},
      {"cat-v1-outside", kCatV1Outside},
      {"cat-v2", kCatV2},
      {"cat-v2-outside", kCatV2Outside},
      {"cat-v2-wakeup", kCatV2Wakeup},
      {"nondemolition", kNondemolition},
  };
  return m;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {
      "eq1-detector",
      "eq3-entangled-observer",
      "eq5-terminal-observer",
      "intermediate-observer",
      "outside-terminal-observer",
      "intermediate-outside-observer",
      "drift-consciousness",
      "sequential-interactions",
      "cat-v1",
      "cat-v1-outside",
      "cat-v2",
      "cat-v2-outside",
      "cat-v2-wakeup",
      "nondemolition",
  };
  return names;
}

const std::string& builtin_text(const std::string& name) {
  static const std::map<std::string, std::string> texts = [] {
    std::map<std::string, std::string> out;
    for (const auto& [key, text] : catalog_map()) out.emplace(key, text);
    return out;
  }();
  auto it = texts.find(name);
  if (it == texts.end())
    throw SimError("UNKNOWN_SCENARIO", "no shipped scenario named '" + name + "'");
  return it->second;
}

Scenario builtin(const std::string& name) {
  return parse_scenario_or_throw(builtin_text(name));
}

}  // namespace roe
