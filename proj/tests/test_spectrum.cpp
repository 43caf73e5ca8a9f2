#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "spectra/spectrum.hpp"
#include "spectra/transport.hpp"

using namespace spectra;

namespace {

class CollectTx : public FrameTransmitter {
 public:
  bool try_send(const Frame& f) override {
    if (busy_budget > 0) {
      --busy_budget;
      return false;
    }
    frames.push_back(f);
    return true;
  }

  std::vector<Frame> frames;
  int busy_budget = 0;
};

}  // namespace

TEST_CASE("counters saturate at 127") {
  SpectrumPool pool(4, 2);
  pool.probe_record(0);
  CHECK(pool.current_counts()[0] == 1);

  for (int i = 0; i < 126; ++i) pool.probe_record(1);
  CHECK(pool.current_counts()[1] == 126);
  pool.probe_record(1);
  CHECK(pool.current_counts()[1] == 127);
  pool.probe_record(1);
  CHECK(pool.current_counts()[1] == 127);

  for (int i = 0; i < 200; ++i) pool.probe_record(2);
  CHECK(pool.current_counts()[2] == 127);
}

TEST_CASE("saturation property: value = min(true_count, 127)") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    SpectrumPool pool(1, 1);
    int hits = std::uniform_int_distribution<int>(0, 400)(rng);
    for (int i = 0; i < hits; ++i) pool.probe_record(0);
    CHECK(pool.current_counts()[0] == std::min(hits, 127));
  }
}

TEST_CASE("paper-scale counter arrays work the same way") {
  SpectrumPool pool(320, 4);
  std::mt19937 rng(3);
  std::vector<int> truth(320, 0);
  for (int i = 0; i < 20000; ++i) {
    int id = std::uniform_int_distribution<int>(0, 319)(rng);
    ++truth[id];
    pool.probe_record(static_cast<std::size_t>(id));
  }
  for (std::size_t id = 0; id < 320; ++id) {
    CHECK(pool.current_counts()[id] == std::min(truth[id], 127));
  }
}

TEST_CASE("probe id out of range is a programming error") {
  SpectrumPool pool(4, 2);
  CHECK_THROWS_AS(pool.probe_record(4), std::out_of_range);
}

TEST_CASE("rotation moves current to the send queue") {
  SpectrumPool pool(3, 3);
  pool.probe_record(0);
  SpectrumPool::EpochMeta meta;
  CHECK(pool.rotate_epoch(1000, &meta) == SpectrumPool::RotateResult::Rotated);
  CHECK(meta.seq == 0);
  CHECK(meta.start_ms == 0);
  CHECK(pool.send_count() == 1);
  CHECK(pool.current_seq() == 1);
  CHECK(pool.current_start_ms() == 1000);
  CHECK(pool.current_counts()[0] == 0);
}

TEST_CASE("pool exhaustion extends the current epoch: capacity 3, 10 rotations") {
  // Queue arithmetic oracle: free starts at capacity-1, so 2 rotate, 8 extend.
  SpectrumPool pool(2, 3);
  int rotated = 0;
  int extended = 0;
  for (int i = 1; i <= 10; ++i) {
    pool.probe_record(0);
    auto r = pool.rotate_epoch(i * 1000);
    if (r == SpectrumPool::RotateResult::Rotated) ++rotated;
    else ++extended;
    CHECK(pool.buffers_in_use() <= pool.capacity());
  }
  CHECK(rotated == 2);
  CHECK(extended == 8);
  CHECK(pool.dropped_rotations() == 8);
  // The extended epoch merged every hit that arrived during starvation.
  CHECK(pool.current_counts()[0] == 8);
  CHECK(pool.current_seq() == 2);
}

TEST_CASE("rotation works again after a drain returns a buffer") {
  SpectrumPool pool(1, 2);
  CHECK(pool.rotate_epoch(1000) == SpectrumPool::RotateResult::Rotated);
  CHECK(pool.rotate_epoch(2000) == SpectrumPool::RotateResult::Extended);

  CollectTx tx;
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentCounter);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentEnd);
  CHECK(pool.rotate_epoch(3000) == SpectrumPool::RotateResult::Rotated);
}

TEST_CASE("drain emits n_funcs counter frames then one END and recycles") {
  SpectrumPool pool(4, 2);
  pool.probe_record(2);
  pool.probe_record(2);
  pool.rotate_epoch(1000);

  CollectTx tx;
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentCounter);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentCounter);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentCounter);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentCounter);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentEnd);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::Idle);

  REQUIRE(tx.frames.size() == 5);
  for (std::uint16_t i = 0; i < 4; ++i) {
    CHECK(tx.frames[i].epoch_seq == 0);
    CHECK(tx.frames[i].counter_index == i);
  }
  CHECK(tx.frames[2].count == 2);
  CHECK(tx.frames[4].is_end());
  CHECK(pool.free_count() == 1);
}

TEST_CASE("a busy transmitter is retried without losing data") {
  SpectrumPool pool(2, 2);
  pool.probe_record(1);
  pool.rotate_epoch(1000);

  CollectTx tx;
  tx.busy_budget = 3;
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::Busy);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::Busy);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::Busy);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentCounter);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentCounter);
  CHECK(pool.drain_step(tx) == SpectrumPool::DrainResult::SentEnd);
  CHECK(tx.frames.size() == 3);
  CHECK(tx.frames[1].count == 1);
}

TEST_CASE("memory bound holds across random schedules with no allocation growth") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t capacity = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    SpectrumPool pool(8, capacity);
    CollectTx tx;
    std::int64_t now = 0;
    for (int step = 0; step < 300; ++step) {
      switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0:
          pool.probe_record(std::uniform_int_distribution<std::size_t>(0, 7)(rng));
          break;
        case 1:
          now += 1000;
          pool.rotate_epoch(now);
          break;
        default:
          pool.drain_step(tx);
          break;
      }
      CHECK(pool.buffers_in_use() <= capacity);
    }
  }
}

TEST_CASE("labels stick to pool-resident epochs") {
  SpectrumPool pool(2, 3);
  pool.label_current(EpochLabel::Fail);
  SpectrumPool::EpochMeta meta;
  pool.rotate_epoch(1000, &meta);
  CHECK(meta.label == EpochLabel::Fail);

  // Epoch 1 is current; epoch 0 sits in the send queue.
  pool.label_epoch(1, EpochLabel::Pass);
  pool.label_epoch(0, EpochLabel::Pass);
  CHECK_THROWS_AS(pool.label_epoch(7, EpochLabel::Fail), std::out_of_range);

  // Relabel overwrites: last write wins.
  pool.label_epoch(1, EpochLabel::Fail);
  pool.rotate_epoch(2000, &meta);
  CHECK(meta.label == EpochLabel::Fail);
}

TEST_CASE("capacity zero drops probes instead of recording") {
  SpectrumPool pool(4, 0);
  CHECK(!pool.has_current());
  pool.probe_record(1);
  pool.probe_record(2);
  CHECK(pool.dropped_probes() == 2);
  CHECK(pool.rotate_epoch(1000) == SpectrumPool::RotateResult::Extended);
}

TEST_CASE("spectra log lines render and parse back") {
  Spectrum s;
  s.epoch_seq = 3;
  s.start_ms = 3000;
  s.label = EpochLabel::Fail;
  s.counts = {0, 17, 127};
  CHECK(spectra_log_line(s) == "epoch=3 t=3000 label=fail counts=0,17,127");

  std::vector<Spectrum> log{s};
  auto parsed = parse_spectra_log(render_spectra_log(log));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].epoch_seq == 3);
  CHECK(parsed[0].start_ms == 3000);
  CHECK(parsed[0].label == EpochLabel::Fail);
  CHECK(parsed[0].counts == s.counts);

  CHECK_THROWS(parse_spectra_log("epoch=0 t=0 label=pass counts=200\n"));
}

TEST_CASE("offline range labeling covers exactly the selected epochs") {
  std::vector<Spectrum> log;
  for (std::uint64_t e = 0; e < 30; ++e) {
    Spectrum s;
    s.epoch_seq = e;
    s.counts = {1};
    log.push_back(s);
  }
  CHECK(label_epoch_range(log, 10, 19, EpochLabel::Pass) == 10);
  for (const auto& s : log) {
    if (s.epoch_seq >= 10 && s.epoch_seq <= 19) CHECK(s.label == EpochLabel::Pass);
    else CHECK(s.label == EpochLabel::Unlabeled);
  }
}
