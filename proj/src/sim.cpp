#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <queue>
#include <set>

#include "spectra/sim.hpp"
#include "spectra/transport.hpp"

namespace spectra {

namespace {

using minic::Execution;
using minic::Program;
using minic::RuntimeError;

// Pushes encoded frames into the serial channel at the simulator's clock.
class ChannelTransmitter : public FrameTransmitter {
 public:
  ChannelTransmitter(SerialChannel& channel) : channel_(channel) {}

  bool try_send(const Frame& frame) override {
    auto bytes = encode_frame(frame);
    if (!channel_.send(bytes, now_us_)) return false;
    last_frame_ = frame;
    return true;
  }

  void set_now(std::int64_t now_us) { now_us_ = now_us; }
  const Frame& last_frame() const { return last_frame_; }

 private:
  SerialChannel& channel_;
  std::int64_t now_us_ = 0;
  Frame last_frame_;
};

enum class PendingKind { Rotate, FaultKick, Post };

struct Pending {
  std::int64_t t_ms;
  int rank;  // rotation first at equal times, then fault kick, then posts
  std::uint64_t seq;
  PendingKind kind;
  int thread_id = -1;
  std::string handler;
  std::vector<std::int64_t> payload;
};

struct PendingOrder {
  bool operator()(const Pending& a, const Pending& b) const {
    if (a.t_ms != b.t_ms) return a.t_ms > b.t_ms;
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.seq > b.seq;
  }
};

struct ThreadState {
  int thread_id = 0;
  int priority = 0;
  std::deque<Message> queue;
  std::optional<Execution> active;
  std::string active_handler;
  std::int64_t active_reg_id = -1;
  std::int64_t dispatched_at = 0;
};

class Simulator : minic::VmHost {
 public:
  Simulator(const Program& program, const Scenario& scenario, const Manifest& manifest,
            const SimConfig& config)
      : program_(program),
        scenario_(scenario),
        manifest_(manifest),
        config_(config),
        pool_(manifest.n_funcs(), config.pool_capacity),
        channel_(config.bytes_per_second, config.channel_buffer),
        tx_(channel_),
        rx_(manifest.n_funcs()) {
    if (config.channel_buffer < kFrameSize) {
      throw ScenarioError("channel buffer must hold at least one frame");
    }
    duration_ms_ = scenario.total_duration_ms();

    for (const auto& t : scenario.threads) {
      ThreadState ts;
      ts.thread_id = t.thread_id;
      ts.priority = t.priority;
      threads_.push_back(std::move(ts));
    }
    std::sort(threads_.begin(), threads_.end(),
              [](const ThreadState& a, const ThreadState& b) { return a.priority > b.priority; });

    for (std::size_t i = 0; i < scenario.handlers.size(); ++i) {
      const auto& h = scenario.handlers[i];
      reg_ids_[h.name] = static_cast<std::int64_t>(i);
      reg_threads_[h.name] = h.thread_id;
    }

    if (config.scope == InstrumentationScope::DispatchEntryOnly) {
      if (has_probes(program)) {
        throw ScenarioError("dispatch-entry scope expects an uninstrumented program");
      }
      std::vector<std::string> reg_names;
      reg_names.reserve(scenario.handlers.size());
      for (const auto& h : scenario.handlers) reg_names.push_back(h.name);
      if (manifest.names() != reg_names) {
        throw ScenarioError("manifest does not match handler registration order");
      }
    }
    if (scenario.n_funcs && *scenario.n_funcs != manifest.n_funcs()) {
      throw ScenarioError("scenario n_funcs=" + std::to_string(*scenario.n_funcs) +
                          " but manifest has " + std::to_string(manifest.n_funcs()));
    }

    for (std::int64_t t = 1000; t <= duration_ms_; t += 1000) schedule_rotate(t);
    if (duration_ms_ % 1000 != 0) schedule_rotate(duration_ms_);
    for (const auto& st : scenario.stimuli) {
      Pending p{st.at_ms, 2, next_pending_seq_++, PendingKind::Post, st.thread_id, st.handler,
                st.payload};
      pending_.push(std::move(p));
    }
    if (scenario.fault.kind == FaultInjection::Kind::LingeringRepost) {
      auto start = scenario.phase_start(scenario.fault.activation_phase);
      Pending p{*start, 1, next_pending_seq_++, PendingKind::FaultKick, -1,
                scenario.fault.handler, {}};
      pending_.push(std::move(p));
    }
  }

  RunResult run() {
    process_due();
    const std::int64_t clock_cap = duration_ms_ + kTrailingFlushCapMs;
    while (true) {
      if (clock_ > clock_cap) {
        throw ScenarioError("trailing flush did not converge");
      }
      ThreadState* th = pick_runnable();
      if (th != nullptr) {
        run_slice(*th);
        continue;
      }
      if (episode_open_ != nullptr) preempt_episode(-1);
      if (!idle_step()) break;
    }
    if (config_.record && rx_.mid_epoch()) {
      throw ScenarioError("receiver ended mid-epoch");
    }

    RunResult out;
    out.events = std::move(events_);
    out.spectra = std::move(received_);
    out.load = cpu_load_series(out.events, duration_ms_);
    out.summary.rotated_epochs = pool_.rotated_epochs();
    out.summary.extended_epochs = pool_.dropped_rotations();
    out.summary.dropped_probes = pool_.dropped_probes();
    out.summary.frames_sent = frames_sent_;
    out.summary.total_busy_ms = total_busy_ms_;
    out.summary.end_of_flush_ms = clock_;
    out.summary.messages_dispatched = messages_dispatched_;
    out.summary.handler_errors = handler_errors_;
    return out;
  }

 private:
  static constexpr std::int64_t kTrailingFlushCapMs = 600'000;

  void schedule_rotate(std::int64_t t) {
    pending_.push(Pending{t, 0, next_pending_seq_++, PendingKind::Rotate, -1, "", {}});
  }

  ThreadState* pick_runnable() {
    for (auto& th : threads_) {
      if (th.active || !th.queue.empty()) return &th;
    }
    return nullptr;
  }

  ThreadState* find_thread(int thread_id) {
    for (auto& th : threads_) {
      if (th.thread_id == thread_id) return &th;
    }
    return nullptr;
  }

  void log(SimEventKind kind, std::int64_t t, int thread_id, const std::string& handler,
           std::int64_t a = 0, std::int64_t b = 0, const std::string& detail = "") {
    events_.push_back(SimEvent{t, kind, thread_id, handler, a, b, detail});
  }

  // Complete/HandlerError close their episode inline; this handles preemption.
  void preempt_episode(int by_thread) {
    log(SimEventKind::Preempt, clock_, episode_open_->thread_id, episode_open_->active_handler,
        0, by_thread);
    episode_open_ = nullptr;
  }

  void run_slice(ThreadState& th) {
    if (episode_open_ != nullptr && episode_open_ != &th) {
      preempt_episode(th.thread_id);
    }
    if (!th.active) {
      if (!dispatch(th)) return;  // dispatch itself failed; events logged
    } else if (episode_open_ != &th) {
      log(SimEventKind::Resume, clock_, th.thread_id, th.active_handler);
      episode_open_ = &th;
    }

    std::int64_t before = th.active->consumed_ms();
    bool failed = false;
    std::string fail_detail;
    try {
      th.active->step_one();
    } catch (const RuntimeError& e) {
      failed = true;
      fail_detail = e.what();
    }
    std::int64_t cost = th.active->consumed_ms() - before;

    apply_probes();
    add_busy(clock_, clock_ + cost);
    clock_ += cost;
    flush_posts();

    if (failed) {
      ++handler_errors_;
      log(SimEventKind::HandlerError, clock_, th.thread_id, th.active_handler, 0, 0,
          fail_detail);
      mark_epoch_failed();
      th.active.reset();
      episode_open_ = nullptr;
    } else if (th.active->done()) {
      log(SimEventKind::Complete, clock_, th.thread_id, th.active_handler,
          th.active->consumed_ms());
      bool was_fault_handler = fault_armed_ && th.active_handler == scenario_.fault.handler;
      th.active.reset();
      episode_open_ = nullptr;
      if (was_fault_handler) {
        // The lingering bug: the poll posts itself again, forever (forever
        // ends when the scenario does).
        std::int64_t due = clock_ + scenario_.fault.repost_period_ms;
        if (due < duration_ms_) {
          Pending p{due, 2, next_pending_seq_++, PendingKind::Post,
                    reg_threads_.at(scenario_.fault.handler), scenario_.fault.handler, {}};
          pending_.push(std::move(p));
        }
      }
    }
    process_due();
    poll_receiver();
  }

  bool dispatch(ThreadState& th) {
    Message msg = std::move(th.queue.front());
    th.queue.pop_front();
    ++messages_dispatched_;
    auto reg = reg_ids_.find(msg.handler);
    std::int64_t reg_id = reg == reg_ids_.end() ? -1 : reg->second;
    log(SimEventKind::Dispatch, clock_, th.thread_id, msg.handler, reg_id);
    episode_open_ = &th;
    if (config_.record && config_.scope == InstrumentationScope::DispatchEntryOnly &&
        reg_id >= 0) {
      pool_.probe_record(static_cast<std::size_t>(reg_id));
    }
    th.active_handler = msg.handler;
    th.active_reg_id = reg_id;
    th.dispatched_at = clock_;
    try {
      th.active.emplace(program_, msg.handler, msg.payload, config_.cost,
                        static_cast<minic::VmHost&>(*this));
    } catch (const RuntimeError& e) {
      ++handler_errors_;
      log(SimEventKind::HandlerError, clock_, th.thread_id, msg.handler, 0, 0, e.what());
      mark_epoch_failed();
      th.active.reset();
      episode_open_ = nullptr;
      return false;
    }
    return true;
  }

  void mark_epoch_failed() {
    if (!config_.record || !pool_.has_current()) return;
    pool_.label_current(EpochLabel::Fail);
    log(SimEventKind::EpochFail, clock_, -1, "", static_cast<std::int64_t>(pool_.current_seq()));
  }

  void apply_probes() {
    for (std::int64_t id : pending_probes_) {
      if (!config_.record) continue;
      if (id < 0 || static_cast<std::size_t>(id) >= manifest_.n_funcs()) {
        // Treat like a handler fault; diagnosis sees a failed epoch.
        mark_epoch_failed();
        continue;
      }
      pool_.probe_record(static_cast<std::size_t>(id));
    }
    pending_probes_.clear();
  }

  void flush_posts() {
    for (const auto& [handler_id, delay] : pending_posts_) {
      std::int64_t due = clock_ + delay;
      // The run stops producing work at scenario end; late posts fall on the
      // floor exactly like messages after power-off would.
      if (due >= duration_ms_) continue;
      const std::string& name = manifest_scope_reg_name(handler_id);
      Pending p{due, 2, next_pending_seq_++, PendingKind::Post, reg_threads_.at(name), name, {}};
      pending_.push(std::move(p));
    }
    pending_posts_.clear();
  }

  const std::string& manifest_scope_reg_name(std::int64_t handler_id) const {
    // post_message ids always follow registration order, independent of the
    // probe manifest in use.
    return scenario_.handlers.at(static_cast<std::size_t>(handler_id)).name;
  }

  void process_due() {
    while (!pending_.empty() && pending_.top().t_ms <= clock_) {
      Pending p = pending_.top();
      pending_.pop();
      switch (p.kind) {
        case PendingKind::Rotate:
          do_rotate(p.t_ms);
          break;
        case PendingKind::FaultKick: {
          fault_armed_ = true;
          int thread_id = reg_threads_.at(p.handler);
          enqueue(thread_id, p.handler, {}, p.t_ms, "fault");
          break;
        }
        case PendingKind::Post:
          enqueue(p.thread_id, p.handler, p.payload, p.t_ms, "post");
          break;
      }
    }
  }

  void do_rotate(std::int64_t timer_ms) {
    if (!config_.record) return;
    SpectrumPool::EpochMeta meta;
    auto r = pool_.rotate_epoch(timer_ms, &meta);
    if (r == SpectrumPool::RotateResult::Rotated) {
      rotated_meta_[meta.seq] = meta;
      log(SimEventKind::Rotate, clock_, -1, "", static_cast<std::int64_t>(meta.seq), 1);
    } else {
      log(SimEventKind::Rotate, clock_, -1, "",
          static_cast<std::int64_t>(pool_.has_current() ? pool_.current_seq() : 0), 0,
          "extended");
    }
  }

  void enqueue(int thread_id, const std::string& handler,
               const std::vector<std::int64_t>& payload, std::int64_t logical_t,
               const std::string& source) {
    ThreadState* th = find_thread(thread_id);
    if (th == nullptr) {
      throw ScenarioError("post to unknown thread " + std::to_string(thread_id));
    }
    th->queue.push_back(Message{handler, payload, logical_t});
    log(SimEventKind::Post, clock_, thread_id, handler, logical_t, 0, source);
  }

  // One idle action: drain a frame if possible, otherwise advance the clock
  // to the next interesting instant. Returns false when the run is over.
  bool idle_step() {
    tx_.set_now(clock_ * 1000);
    if (config_.record) {
      auto r = pool_.drain_step(tx_);
      if (r == SpectrumPool::DrainResult::SentCounter ||
          r == SpectrumPool::DrainResult::SentEnd) {
        ++frames_sent_;
        const Frame& f = tx_.last_frame();
        log(SimEventKind::DrainFrame, clock_, -1, "", f.epoch_seq,
            f.is_end() ? -1 : f.counter_index);
        poll_receiver();
        return true;
      }
    }

    std::optional<std::int64_t> next_t;
    if (!pending_.empty()) next_t = pending_.top().t_ms;
    if (config_.record) {
      if (auto ready = channel_.next_ready_us()) {
        std::int64_t t = (*ready + 999) / 1000;
        if (!next_t || t < *next_t) next_t = t;
      }
    }
    if (!next_t) {
      bool transport_done = !config_.record ||
                            (pool_.send_count() == 0 && channel_.in_flight() == 0);
      if (transport_done) return false;
      throw ScenarioError("idle stall with data in flight");
    }
    clock_ = std::max(clock_, *next_t);
    poll_receiver();
    process_due();
    return true;
  }

  void poll_receiver() {
    if (!config_.record) return;
    for (std::uint8_t b : channel_.poll(clock_ * 1000)) {
      auto done = rx_.feed_byte(b);
      if (done) {
        auto it = rotated_meta_.find(done->epoch_seq);
        if (it == rotated_meta_.end()) {
          throw ScenarioError("received epoch " + std::to_string(done->epoch_seq) +
                              " was never rotated");
        }
        done->start_ms = it->second.start_ms;
        done->label = it->second.label;
        received_.push_back(std::move(*done));
      }
    }
  }

  void add_busy(std::int64_t from, std::int64_t to) {
    total_busy_ms_ += to - from;
    while (from < to) {
      std::int64_t sec = from / 1000;
      std::int64_t end = std::min(to, (sec + 1) * 1000);
      if (static_cast<std::size_t>(sec) >= busy_.size()) busy_.resize(sec + 1, 0);
      busy_[sec] += end - from;
      from = end;
    }
  }

  // VmHost: effects are buffered and applied at the statement boundary.
  void on_probe(std::int64_t id) override { pending_probes_.push_back(id); }

  void on_post_message(std::int64_t handler_id, std::int64_t delay_ms) override {
    if (handler_id < 0 ||
        static_cast<std::size_t>(handler_id) >= scenario_.handlers.size()) {
      throw RuntimeError(minic::RuntimeFault::UnknownFunction, {}, 0,
                         "post_message: bad handler id " + std::to_string(handler_id));
    }
    pending_posts_.emplace_back(handler_id, delay_ms);
  }

  void on_print(std::int64_t) override {}

  const Program& program_;
  const Scenario& scenario_;
  const Manifest& manifest_;
  SimConfig config_;

  SpectrumPool pool_;
  SerialChannel channel_;
  ChannelTransmitter tx_;
  Reassembler rx_;

  std::vector<ThreadState> threads_;  // priority-descending
  std::map<std::string, std::int64_t> reg_ids_;
  std::map<std::string, int> reg_threads_;
  std::priority_queue<Pending, std::vector<Pending>, PendingOrder> pending_;
  std::uint64_t next_pending_seq_ = 0;

  std::int64_t duration_ms_ = 0;
  std::int64_t clock_ = 0;
  ThreadState* episode_open_ = nullptr;
  bool fault_armed_ = false;

  std::vector<std::int64_t> pending_probes_;
  std::vector<std::pair<std::int64_t, std::int64_t>> pending_posts_;

  std::map<std::uint64_t, SpectrumPool::EpochMeta> rotated_meta_;
  std::vector<Spectrum> received_;
  std::vector<SimEvent> events_;
  std::vector<std::int64_t> busy_;
  std::int64_t total_busy_ms_ = 0;
  std::uint64_t frames_sent_ = 0;
  std::uint64_t messages_dispatched_ = 0;
  std::uint64_t handler_errors_ = 0;
};

}  // namespace

RunResult run_simulation(const minic::Program& program, const Scenario& scenario,
                         const Manifest& manifest, const SimConfig& config) {
  Simulator sim(program, scenario, manifest, config);
  return sim.run();
}

}  // namespace spectra
