#include "roe/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "roe/rules.hpp"

namespace roe {

Superposition Scenario::initial_state() const {
  Superposition s;
  s.components = components;
  s.time = 0.0;
  return s;
}

FlowGraph Scenario::flow_graph() const {
  FlowGraph g;
  for (const auto& f : flows) {
    const InteractionSpec* i = interaction(f.interaction);
    if (!i) continue;
    RateProfile p{f.profile, i->t_start, i->t_end, f.peak};
    g.edges.push_back({f.source, f.target, p, f.interaction});
  }
  return g;
}

double Scenario::end_time() const {
  double t = 0.0;
  for (const auto& i : interactions) t = std::max(t, i.t_end);
  return t;
}

const InteractionSpec* Scenario::interaction(const std::string& name) const {
  for (const auto& i : interactions)
    if (i.name == name) return &i;
  return nullptr;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

namespace {

struct Token {
  std::string text;
  int column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
           line[j] != '#')
      ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i + 1)});
    i = j;
  }
  return out;
}

struct ParseAbort {
  Diagnostic diag;
};

[[noreturn]] void fail(const std::string& code, int line, int column,
                       const std::string& message) {
  throw ParseAbort{{Diagnostic::Severity::Error, code, line, column, message}};
}

class LineParser {
 public:
  LineParser(const std::vector<Token>& toks, int line) : toks_(toks), line_(line) {}

  bool done() const { return pos_ >= toks_.size(); }

  const Token& next(const std::string& expected) {
    if (done())
      fail("SYNTAX_ERROR", line_, end_column(),
           "unexpected end of line, expected " + expected);
    return toks_[pos_++];
  }

  const Token& peek() const { return toks_[pos_]; }

  double number(const std::string& what) {
    const Token& t = next(what);
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      fail("SYNTAX_ERROR", line_, t.column, "expected a number for " + what);
    if (!std::isfinite(v))
      fail("SYNTAX_ERROR", line_, t.column, what + " must be finite");
    return v;
  }

  void expect_end() {
    if (!done())
      fail("SYNTAX_ERROR", line_, peek().column,
           "unexpected token '" + peek().text + "'");
  }

  int line() const { return line_; }
  int end_column() const {
    return toks_.empty() ? 1 : toks_.back().column + static_cast<int>(toks_.back().text.size());
  }

 private:
  const std::vector<Token>& toks_;
  int line_;
  size_t pos_ = 1;  // token 0 is the keyword
};

struct Positioned {
  int line = 0;
  int column = 0;
};

}  // namespace

ParseResult parse_scenario(const std::string& text) {
  ParseResult result;
  Scenario sc;
  bool have_name = false;
  std::map<std::string, Positioned> brain_refs;  // observer -> first use
  std::map<std::string, Positioned> flow_comp_refs;

  try {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::vector<Token> toks = tokenize(raw);
      if (toks.empty()) continue;
      LineParser lp(toks, line_no);
      const std::string& kw = toks[0].text;

      if (kw == "scenario") {
        if (have_name)
          fail("SYNTAX_ERROR", line_no, toks[0].column, "duplicate scenario line");
        sc.name = lp.next("scenario name").text;
        lp.expect_end();
        have_name = true;
      } else if (kw == "observer") {
        const Token& id = lp.next("observer id");
        if (std::find(sc.observers.begin(), sc.observers.end(), id.text) !=
            sc.observers.end())
          fail("SYNTAX_ERROR", line_no, id.column,
               "observer '" + id.text + "' declared twice");
        sc.observers.push_back(id.text);
        lp.expect_end();
      } else if (kw == "component") {
        Component c;
        const Token& id = lp.next("component id");
        c.id = id.text;
        for (const auto& prev : sc.components)
          if (prev.id == c.id)
            fail("SYNTAX_ERROR", line_no, id.column,
                 "component '" + c.id + "' declared twice");
        bool have_weight = false;
        while (!lp.done()) {
          const Token& key = lp.next("component attribute");
          if (key.text == "weight") {
            c.weight = lp.number("weight");
            have_weight = true;
          } else if (key.text == "particle") {
            c.particle = lp.next("particle label").text;
          } else if (key.text == "detector") {
            c.detector = lp.next("detector label").text;
          } else if (key.text == "env") {
            c.env = lp.next("environment tag").text;
          } else if (key.text == "brain") {
            BrainLabel b;
            const Token& obs = lp.next("observer id");
            b.observer = obs.text;
            if (!brain_refs.count(b.observer))
              brain_refs[b.observer] = {line_no, obs.column};
            const Token& kind = lp.next("brain kind (x|ready|conscious)");
            if (kind.text == "x") {
              b.kind = BrainKind::UnknownX;
            } else if (kind.text == "ready") {
              b.kind = BrainKind::Ready;
              b.state = lp.next("brain state name").text;
            } else if (kind.text == "conscious") {
              b.kind = BrainKind::Conscious;
              b.state = lp.next("brain state name").text;
            } else {
              fail("SYNTAX_ERROR", line_no, kind.column,
                   "expected x, ready or conscious");
            }
            if (c.brain_for(b.observer))
              fail("SYNTAX_ERROR", line_no, obs.column,
                   "component '" + c.id + "' has two brain labels for '" +
                       b.observer + "'");
            c.brains.push_back(b);
          } else {
            fail("SYNTAX_ERROR", line_no, key.column,
                 "unknown component attribute '" + key.text + "'");
          }
        }
        if (!have_weight)
          fail("SYNTAX_ERROR", line_no, id.column,
               "component '" + c.id + "' has no weight");
        if (c.env.empty()) c.env = c.id;  // its own environment class
        sc.components.push_back(std::move(c));
      } else if (kw == "interact") {
        InteractionSpec spec;
        const Token& id = lp.next("interaction name");
        spec.name = id.text;
        if (sc.interaction(spec.name))
          fail("SYNTAX_ERROR", line_no, id.column,
               "interaction '" + spec.name + "' declared twice");
        const Token& kind = lp.next("interaction kind");
        if (kind.text == "particle_detector")
          spec.kind = InteractionKind::ParticleDetector;
        else if (kind.text == "physiological")
          spec.kind = InteractionKind::Physiological;
        else if (kind.text == "detector_detector")
          spec.kind = InteractionKind::DetectorDetector;
        else
          fail("SYNTAX_ERROR", line_no, kind.column,
               "expected particle_detector, physiological or detector_detector");
        const Token& word = lp.next("'observer' or 'window'");
        bool have_observer = false;
        if (word.text == "observer") {
          const Token& obs = lp.next("observer id");
          spec.observer = obs.text;
          have_observer = true;
          if (std::find(sc.observers.begin(), sc.observers.end(), spec.observer) ==
              sc.observers.end())
            fail("UNKNOWN_REFERENCE", line_no, obs.column,
                 "observer '" + spec.observer + "' is not declared");
          const Token& w2 = lp.next("'window'");
          if (w2.text != "window")
            fail("SYNTAX_ERROR", line_no, w2.column, "expected 'window'");
        } else if (word.text != "window") {
          fail("SYNTAX_ERROR", line_no, word.column, "expected 'observer' or 'window'");
        }
        if (spec.kind == InteractionKind::Physiological && !have_observer)
          fail("SYNTAX_ERROR", line_no, kind.column,
               "physiological interaction needs an observer");
        if (spec.kind != InteractionKind::Physiological && have_observer)
          fail("SYNTAX_ERROR", line_no, kind.column,
               "only physiological interactions take an observer");
        spec.t_start = lp.number("window start");
        spec.t_end = lp.number("window end");
        if (!(spec.t_end > spec.t_start))
          fail("SYNTAX_ERROR", line_no, id.column,
               "interaction window must have positive width");
        lp.expect_end();
        sc.interactions.push_back(std::move(spec));
      } else if (kw == "flow") {
        FlowSpec f;
        const Token& iname = lp.next("interaction name");
        f.interaction = iname.text;
        if (!sc.interaction(f.interaction))
          fail("UNKNOWN_REFERENCE", line_no, iname.column,
               "interaction '" + f.interaction + "' is not declared");
        const Token& src = lp.next("source component");
        f.source = src.text;
        if (!flow_comp_refs.count(f.source))
          flow_comp_refs[f.source] = {line_no, src.column};
        const Token& arrow = lp.next("'->'");
        if (arrow.text != "->")
          fail("SYNTAX_ERROR", line_no, arrow.column, "expected '->'");
        const Token& dst = lp.next("target component");
        f.target = dst.text;
        if (!flow_comp_refs.count(f.target))
          flow_comp_refs[f.target] = {line_no, dst.column};
        if (f.source == f.target)
          fail("SYNTAX_ERROR", line_no, dst.column, "flow source equals target");
        const Token& kind = lp.next("profile kind (ramp|const)");
        if (kind.text == "ramp")
          f.profile = ProfileKind::Ramp;
        else if (kind.text == "const")
          f.profile = ProfileKind::Const;
        else
          fail("SYNTAX_ERROR", line_no, kind.column, "expected ramp or const");
        const int rate_col = lp.done() ? lp.end_column() : lp.peek().column;
        f.peak = lp.number("rate");
        if (f.peak < 0.0)
          fail("NEGATIVE_RATE", line_no, rate_col, "rates must be nonnegative");
        lp.expect_end();
        sc.flows.push_back(std::move(f));
      } else {
        fail("SYNTAX_ERROR", line_no, toks[0].column,
             "unknown keyword '" + kw + "'");
      }
    }

    if (!have_name) fail("SYNTAX_ERROR", line_no ? line_no : 1, 1,
                         "missing scenario declaration");

    for (const auto& [observer, pos] : brain_refs)
      if (std::find(sc.observers.begin(), sc.observers.end(), observer) ==
          sc.observers.end())
        fail("UNKNOWN_REFERENCE", pos.line, pos.column,
             "observer '" + observer + "' is not declared");

    for (const auto& [id, pos] : flow_comp_refs)
      if (!std::any_of(sc.components.begin(), sc.components.end(),
                       [&](const Component& c) { return c.id == id; }))
        fail("UNKNOWN_REFERENCE", pos.line, pos.column,
             "component '" + id + "' is not declared");

    if (sc.components.empty())
      fail("BAD_NORMALIZATION", line_no ? line_no : 1, 1,
           "scenario declares no components");
    double sum = 0.0;
    for (const auto& c : sc.components) {
      if (c.weight < 0.0)
        fail("BAD_NORMALIZATION", 0, 0, "component '" + c.id + "' has negative weight");
      sum += c.weight;
    }
    if (std::abs(sum - 1.0) > kWeightTolerance)
      fail("BAD_NORMALIZATION", 0, 0,
           "initial weights sum to " + format_double(sum) + ", expected 1");

    result.scenario = std::move(sc);
  } catch (const ParseAbort& abort) {
    result.diagnostics.push_back(abort.diag);
  }
  return result;
}

Scenario parse_scenario_or_throw(const std::string& text) {
  ParseResult r = parse_scenario(text);
  if (r.ok()) return std::move(*r.scenario);
  const Diagnostic& d = r.diagnostics.front();
  throw SimError(d.code, "line " + std::to_string(d.line) + ":" +
                             std::to_string(d.column) + ": " + d.message);
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "scenario " << s.name << "\n";
  for (const auto& o : s.observers) out << "observer " << o << "\n";
  for (const auto& c : s.components) {
    out << "component " << c.id << " weight " << format_double(c.weight);
    if (c.particle != "-") out << " particle " << c.particle;
    if (c.detector != "-") out << " detector " << c.detector;
    out << " env " << c.env;
    for (const auto& b : c.brains) {
      out << " brain " << b.observer << " ";
      switch (b.kind) {
        case BrainKind::UnknownX:
          out << "x";
          break;
        case BrainKind::Ready:
          out << "ready " << b.state;
          break;
        case BrainKind::Conscious:
          out << "conscious " << b.state;
          break;
        case BrainKind::Absent:
          out << "x";  // not representable; nearest neutral form
          break;
      }
    }
    out << "\n";
  }
  for (const auto& i : s.interactions) {
    out << "interact " << i.name << " ";
    switch (i.kind) {
      case InteractionKind::ParticleDetector:
        out << "particle_detector";
        break;
      case InteractionKind::Physiological:
        out << "physiological observer " << i.observer;
        break;
      case InteractionKind::DetectorDetector:
        out << "detector_detector";
        break;
    }
    out << " window " << format_double(i.t_start) << " " << format_double(i.t_end)
        << "\n";
  }
  for (const auto& f : s.flows) {
    out << "flow " << f.interaction << " " << f.source << " -> " << f.target << " "
        << (f.profile == ProfileKind::Ramp ? "ramp" : "const") << " "
        << format_double(f.peak) << "\n";
  }
  return out.str();
}

std::vector<Diagnostic> validate(const Scenario& s) {
  std::vector<Diagnostic> out;

  // Selection-rule conformance: a physiological interaction may only mint
  // ready states for its observer. A conscious label on the target is fine
  // when the source already carries the same conscious state (it is carried
  // along, not created).
  for (const auto& i : s.interactions) {
    if (i.kind != InteractionKind::Physiological) continue;
    for (const auto& f : s.flows) {
      if (f.interaction != i.name) continue;
      const Component* src = nullptr;
      const Component* dst = nullptr;
      for (const auto& c : s.components) {
        if (c.id == f.source) src = &c;
        if (c.id == f.target) dst = &c;
      }
      if (!src || !dst) continue;
      const BrainLabel* target_label = dst->brain_for(i.observer);
      if (!target_label || target_label->kind == BrainKind::UnknownX ||
          target_label->kind == BrainKind::Absent) {
        out.push_back({Diagnostic::Severity::Info, "NO_READY_TARGET", 0, 0,
                       "interaction '" + i.name + "': target '" + dst->id +
                           "' carries no ready state for observer '" + i.observer +
                           "'"});
        continue;
      }
      if (target_label->kind == BrainKind::Conscious) {
        const BrainLabel* source_label = src->brain_for(i.observer);
        const bool carried = source_label &&
                             source_label->kind == BrainKind::Conscious &&
                             source_label->state == target_label->state;
        if (!carried)
          out.push_back({Diagnostic::Severity::Violation, "CONSCIOUS_CREATION", 0, 0,
                         "interaction '" + i.name + "' would make observer '" +
                             i.observer + "' conscious of '" + target_label->state +
                             "' without a stochastic choice"});
      }
    }
  }

  // Anomalous-capture filter preview on the declared labels.
  const Superposition initial = s.initial_state();
  const FlowGraph g = s.flow_graph();
  const FlowGraph filtered = rule4_filter(g, initial);
  size_t removed = 0;
  for (const auto& e : g.edges) {
    const bool kept = std::any_of(filtered.edges.begin(), filtered.edges.end(),
                                  [&](const FlowEdge& k) {
                                    return k.source == e.source && k.target == e.target &&
                                           k.interaction == e.interaction;
                                  });
    if (!kept) {
      ++removed;
      out.push_back({Diagnostic::Severity::Info, "RULE4_REMOVED", 0, 0,
                     "anomalous-capture filter removes flow " + e.source + " -> " +
                         e.target + " (interaction '" + e.interaction + "')"});
    }
  }
  if (removed == 0)
    out.push_back({Diagnostic::Severity::Info, "RULE4_CLEAN", 0, 0,
                   "anomalous-capture filter removes no edges"});

  // Components that can never carry weight.
  for (const auto& c : s.components) {
    if (c.weight > 0.0) continue;
    const bool is_target = std::any_of(s.flows.begin(), s.flows.end(),
                                       [&](const FlowSpec& f) { return f.target == c.id; });
    if (!is_target)
      out.push_back({Diagnostic::Severity::Info, "UNREACHABLE", 0, 0,
                     "component '" + c.id + "' starts empty and receives no flow"});
  }

  return out;
}

}  // namespace roe
