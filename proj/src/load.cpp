#include <cassert>
#include <cstdio>
#include <sstream>

#include "spectra/sim.hpp"

namespace spectra {

namespace {

bool opens_episode(SimEventKind k) {
  return k == SimEventKind::Dispatch || k == SimEventKind::Resume;
}

bool closes_episode(SimEventKind k) {
  return k == SimEventKind::Preempt || k == SimEventKind::Complete ||
         k == SimEventKind::HandlerError;
}

}  // namespace

std::vector<LoadSample> cpu_load_series(const std::vector<SimEvent>& events,
                                        std::int64_t duration_ms) {
  std::int64_t seconds = (duration_ms + 999) / 1000;
  std::vector<LoadSample> out(static_cast<std::size_t>(seconds));
  for (std::int64_t i = 0; i < seconds; ++i) out[static_cast<std::size_t>(i)].second_index = i;

  std::optional<std::int64_t> open_since;
  auto add = [&](std::int64_t from, std::int64_t to) {
    while (from < to) {
      std::int64_t sec = from / 1000;
      std::int64_t end = std::min(to, (sec + 1) * 1000);
      if (sec < seconds) out[static_cast<std::size_t>(sec)].busy_ms += end - from;
      from = end;
    }
  };

  for (const auto& e : events) {
    if (opens_episode(e.kind)) {
      assert(!open_since);
      open_since = e.t_ms;
    } else if (closes_episode(e.kind)) {
      if (open_since) {
        add(*open_since, e.t_ms);
        open_since.reset();
      }
    }
  }
  assert(!open_since);
  return out;
}

std::string render_load_csv(const std::vector<LoadSample>& samples) {
  std::string out = "second,load\n";
  char buf[64];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%lld,%.3f", static_cast<long long>(s.second_index),
                  s.load());
    out += buf;
    out += '\n';
  }
  return out;
}

std::vector<LoadSample> parse_load_csv(const std::string& text) {
  std::vector<LoadSample> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "second,load" || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("load csv line " + std::to_string(lineno) +
                                  ": expected <second>,<load>");
    }
    LoadSample s;
    try {
      s.second_index = std::stoll(line.substr(0, comma));
      double load = std::stod(line.substr(comma + 1));
      s.busy_ms = static_cast<std::int64_t>(load * 1000.0 + 0.5);
    } catch (const std::exception&) {
      throw std::invalid_argument("load csv line " + std::to_string(lineno) + ": bad number");
    }
    if (s.busy_ms < 0 || s.busy_ms > 1000) {
      throw std::invalid_argument("load csv line " + std::to_string(lineno) +
                                  ": load outside [0,1]");
    }
    out.push_back(s);
  }
  return out;
}

namespace {

const char* kind_name(SimEventKind k) {
  switch (k) {
    case SimEventKind::Post: return "post";
    case SimEventKind::Dispatch: return "dispatch";
    case SimEventKind::Preempt: return "preempt";
    case SimEventKind::Resume: return "resume";
    case SimEventKind::Complete: return "complete";
    case SimEventKind::HandlerError: return "handler-error";
    case SimEventKind::Rotate: return "rotate";
    case SimEventKind::EpochFail: return "epoch-fail";
    case SimEventKind::DrainFrame: return "drain";
  }
  return "?";
}

}  // namespace

std::string render_event_log(const std::vector<SimEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += "t=" + std::to_string(e.t_ms) + " " + kind_name(e.kind);
    switch (e.kind) {
      case SimEventKind::Post:
        out += " thread=" + std::to_string(e.thread_id) + " handler=" + e.handler +
               " due=" + std::to_string(e.a) + " source=" + e.detail;
        break;
      case SimEventKind::Dispatch:
        out += " thread=" + std::to_string(e.thread_id) + " handler=" + e.handler +
               " id=" + std::to_string(e.a);
        break;
      case SimEventKind::Preempt:
        out += " thread=" + std::to_string(e.thread_id) + " handler=" + e.handler +
               " by=" + std::to_string(e.b);
        break;
      case SimEventKind::Resume:
        out += " thread=" + std::to_string(e.thread_id) + " handler=" + e.handler;
        break;
      case SimEventKind::Complete:
        out += " thread=" + std::to_string(e.thread_id) + " handler=" + e.handler +
               " consumed=" + std::to_string(e.a);
        break;
      case SimEventKind::HandlerError:
        out += " thread=" + std::to_string(e.thread_id) + " handler=" + e.handler + " " +
               e.detail;
        break;
      case SimEventKind::Rotate:
        out += " epoch=" + std::to_string(e.a) +
               std::string(e.b != 0 ? " result=rotated" : " result=extended");
        break;
      case SimEventKind::EpochFail:
        out += " epoch=" + std::to_string(e.a);
        break;
      case SimEventKind::DrainFrame:
        out += " epoch=" + std::to_string(e.a) +
               (e.b < 0 ? std::string(" index=end") : " index=" + std::to_string(e.b));
        break;
    }
    out += '\n';
  }
  return out;
}

}  // namespace spectra
