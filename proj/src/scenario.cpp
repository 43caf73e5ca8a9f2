#include <algorithm>
#include <set>
#include <sstream>

#include "spectra/sim.hpp"

namespace spectra {

std::int64_t Scenario::total_duration_ms() const {
  std::int64_t total = 0;
  for (const auto& p : phases) total += p.duration_ms;
  return total;
}

std::optional<std::int64_t> Scenario::phase_start(const std::string& name) const {
  std::int64_t t = 0;
  for (const auto& p : phases) {
    if (p.name == name) return t;
    t += p.duration_ms;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::int64_t to_i64(const std::string& s, std::size_t lineno, const char* what) {
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ScenarioError("scenario line " + std::to_string(lineno) + ": bad " + what +
                        " '" + s + "'");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto words = split_ws(line);
    if (words.empty()) continue;

    const std::string& head = words[0];
    auto eq = head.find('=');
    if (words.size() == 1 && eq != std::string::npos) {
      std::string key = head.substr(0, eq);
      std::string value = head.substr(eq + 1);
      if (key == "seed") sc.seed = to_i64(value, lineno, "seed");
      else if (key == "n_funcs") sc.n_funcs = static_cast<std::size_t>(to_i64(value, lineno, "n_funcs"));
      else if (key == "capacity") sc.capacity = static_cast<std::size_t>(to_i64(value, lineno, "capacity"));
      else if (key == "bytes_per_second") sc.bytes_per_second = to_i64(value, lineno, "bytes_per_second");
      else if (key == "scope") {
        if (value == "dispatch") sc.scope = InstrumentationScope::DispatchEntryOnly;
        else if (value == "all") sc.scope = InstrumentationScope::AllCalls;
        else throw ScenarioError("scenario line " + std::to_string(lineno) +
                                 ": scope must be 'dispatch' or 'all'");
      } else {
        throw ScenarioError("scenario line " + std::to_string(lineno) + ": unknown key '" +
                            key + "'");
      }
      continue;
    }

    if (head == "thread") {
      if (words.size() != 3) {
        throw ScenarioError("scenario line " + std::to_string(lineno) +
                            ": expected 'thread <id> <priority>'");
      }
      sc.threads.push_back({static_cast<int>(to_i64(words[1], lineno, "thread id")),
                            static_cast<int>(to_i64(words[2], lineno, "priority"))});
    } else if (head == "handler") {
      if (words.size() != 3) {
        throw ScenarioError("scenario line " + std::to_string(lineno) +
                            ": expected 'handler <name> <thread_id>'");
      }
      sc.handlers.push_back({words[1], static_cast<int>(to_i64(words[2], lineno, "thread id"))});
    } else if (head == "phase") {
      if (words.size() != 3) {
        throw ScenarioError("scenario line " + std::to_string(lineno) +
                            ": expected 'phase <name> <duration_ms>'");
      }
      sc.phases.push_back({words[1], to_i64(words[2], lineno, "duration")});
    } else if (head == "fault") {
      if (words.size() != 5 || words[1] != "lingering-repost") {
        throw ScenarioError("scenario line " + std::to_string(lineno) +
                            ": expected 'fault lingering-repost <handler> <period_ms> <phase>'");
      }
      sc.fault.kind = FaultInjection::Kind::LingeringRepost;
      sc.fault.handler = words[2];
      sc.fault.repost_period_ms = to_i64(words[3], lineno, "period");
      sc.fault.activation_phase = words[4];
    } else if (head == "at") {
      if (words.size() < 5 || words[2] != "post") {
        throw ScenarioError("scenario line " + std::to_string(lineno) +
                            ": expected 'at <t_ms> post <thread_id> <handler> [args...]'");
      }
      Stimulus st;
      st.at_ms = to_i64(words[1], lineno, "time");
      st.thread_id = static_cast<int>(to_i64(words[3], lineno, "thread id"));
      st.handler = words[4];
      for (std::size_t i = 5; i < words.size(); ++i) {
        st.payload.push_back(to_i64(words[i], lineno, "argument"));
      }
      sc.stimuli.push_back(std::move(st));
    } else {
      throw ScenarioError("scenario line " + std::to_string(lineno) + ": unknown directive '" +
                          head + "'");
    }
  }
  return sc;
}

namespace {

void validate(const Scenario& sc, const minic::Program& program) {
  if (sc.threads.empty()) throw ScenarioError("scenario declares no threads");
  if (sc.phases.empty()) throw ScenarioError("scenario declares no phases");

  std::set<int> thread_ids;
  std::set<int> priorities;
  for (const auto& t : sc.threads) {
    if (!thread_ids.insert(t.thread_id).second) {
      throw ScenarioError("duplicate thread id " + std::to_string(t.thread_id));
    }
    if (!priorities.insert(t.priority).second) {
      throw ScenarioError("duplicate thread priority " + std::to_string(t.priority));
    }
  }

  std::set<std::string> handler_names;
  for (const auto& h : sc.handlers) {
    if (!handler_names.insert(h.name).second) {
      throw ScenarioError("duplicate handler '" + h.name + "'");
    }
    if (thread_ids.count(h.thread_id) == 0) {
      throw ScenarioError("handler '" + h.name + "' registered on unknown thread " +
                          std::to_string(h.thread_id));
    }
    if (program.find_function(h.name) == nullptr) {
      throw ScenarioError("handler '" + h.name + "' is not a program function");
    }
  }

  for (const auto& p : sc.phases) {
    if (p.duration_ms <= 0) throw ScenarioError("phase '" + p.name + "' has no duration");
  }

  std::int64_t duration = sc.total_duration_ms();
  std::int64_t last = 0;
  for (const auto& st : sc.stimuli) {
    if (st.at_ms < 0 || st.at_ms >= duration) {
      throw ScenarioError("stimulus at " + std::to_string(st.at_ms) +
                          " outside scenario duration");
    }
    if (st.at_ms < last) {
      throw ScenarioError("stimuli must be time-ordered (offender at " +
                          std::to_string(st.at_ms) + ")");
    }
    last = st.at_ms;
    if (thread_ids.count(st.thread_id) == 0) {
      throw ScenarioError("stimulus targets unknown thread " + std::to_string(st.thread_id));
    }
    if (handler_names.count(st.handler) == 0) {
      throw ScenarioError("stimulus targets unregistered handler '" + st.handler + "'");
    }
  }

  if (sc.fault.kind != FaultInjection::Kind::None) {
    if (handler_names.count(sc.fault.handler) == 0) {
      throw ScenarioError("fault references unregistered handler '" + sc.fault.handler + "'");
    }
    if (!sc.phase_start(sc.fault.activation_phase)) {
      throw ScenarioError("fault activation phase '" + sc.fault.activation_phase +
                          "' not declared");
    }
    if (sc.fault.repost_period_ms < 0) throw ScenarioError("fault period must be >= 0");
  }
}

}  // namespace

Scenario load_scenario(const std::string& text, const minic::Program& program) {
  Scenario sc = parse_scenario(text);
  validate(sc, program);
  return sc;
}

}  // namespace spectra
