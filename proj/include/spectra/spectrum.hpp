#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectra {

inline constexpr std::uint8_t kCountSaturation = 127;

enum class EpochLabel { Unlabeled, Pass, Fail };

const char* to_string(EpochLabel label);
EpochLabel label_from_string(const std::string& s);

// One collection epoch: a fixed-length array of saturating call counters
// plus metadata.
struct Spectrum {
  std::uint64_t epoch_seq = 0;
  std::int64_t start_ms = 0;
  EpochLabel label = EpochLabel::Unlabeled;
  std::vector<std::uint8_t> counts;
};

// Accepts one frame's worth of data; false means busy, try again later.
struct Frame;
class FrameTransmitter {
 public:
  virtual ~FrameTransmitter() = default;
  virtual bool try_send(const Frame& frame) = 0;
};

// Fixed-budget epoch buffering: a free queue of empty counter arrays, a send
// queue of filled ones awaiting transmission, and the current recording
// target. All buffers are allocated up front; nothing allocates afterwards.
class SpectrumPool {
 public:
  SpectrumPool(std::size_t n_funcs, std::size_t capacity);

  // Saturating increment of the current epoch's counter. With no current
  // buffer (capacity 0) the hit is counted as dropped instead.
  void probe_record(std::size_t id);

  enum class RotateResult { Rotated, Extended };
  struct EpochMeta {
    std::uint64_t seq = 0;
    std::int64_t start_ms = 0;
    EpochLabel label = EpochLabel::Unlabeled;
  };

  // Timer tick: queue the current spectrum for sending and start a fresh
  // epoch, or extend the current epoch when no free buffer is available.
  // On rotation, the outgoing epoch's metadata is written to *rotated.
  RotateResult rotate_epoch(std::int64_t now_ms, EpochMeta* rotated = nullptr);

  enum class DrainResult { SentCounter, SentEnd, Idle, Busy };

  // Idle hook: emit one frame of the send queue's head spectrum. After the
  // last counter an END frame completes the spectrum and the buffer is
  // recycled. Busy transmitters are retried on a later step; nothing is lost.
  DrainResult drain_step(FrameTransmitter& tx);

  void label_current(EpochLabel label);
  // Labels the epoch if it is still pool-resident (current or queued).
  void label_epoch(std::uint64_t epoch_seq, EpochLabel label);

  std::size_t n_funcs() const { return n_funcs_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t free_count() const { return free_.size(); }
  std::size_t send_count() const { return send_.size(); }
  bool has_current() const { return current_.has_value(); }
  std::size_t buffers_in_use() const;
  std::uint64_t dropped_rotations() const { return dropped_rotations_; }
  std::uint64_t dropped_probes() const { return dropped_probes_; }
  std::uint64_t rotated_epochs() const { return rotated_epochs_; }

  std::uint64_t current_seq() const;
  std::int64_t current_start_ms() const;
  const std::vector<std::uint8_t>& current_counts() const;

 private:
  struct Buffer {
    std::vector<std::uint8_t> counts;
    std::uint64_t seq = 0;
    std::int64_t start_ms = 0;
    EpochLabel label = EpochLabel::Unlabeled;
    std::size_t send_pos = 0;
  };

  // Fixed-capacity FIFO of buffer indices.
  class IndexFifo {
   public:
    explicit IndexFifo(std::size_t cap) : slots_(cap == 0 ? 1 : cap) {}
    bool empty() const { return count_ == 0; }
    std::size_t size() const { return count_; }
    void push(std::size_t v);
    std::size_t front() const;
    std::size_t pop();

   private:
    std::vector<std::size_t> slots_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
  };

  Buffer& current() { return buffers_[*current_]; }
  const Buffer& current() const { return buffers_[*current_]; }

  std::size_t n_funcs_;
  std::size_t capacity_;
  std::vector<Buffer> buffers_;
  IndexFifo free_;
  IndexFifo send_;
  std::optional<std::size_t> current_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dropped_rotations_ = 0;
  std::uint64_t dropped_probes_ = 0;
  std::uint64_t rotated_epochs_ = 0;
};

// Offline spectra log, one line per epoch:
//   epoch=<seq> t=<start_ms> label=<pass|fail|unlabeled> counts=<c0>,...,<cN-1>
std::string spectra_log_line(const Spectrum& s);
std::string render_spectra_log(const std::vector<Spectrum>& log);
std::vector<Spectrum> parse_spectra_log(const std::string& text);

// Offline range labeling over a loaded log; [lo, hi] inclusive on epoch_seq.
std::size_t label_epoch_range(std::vector<Spectrum>& log, std::uint64_t lo,
                              std::uint64_t hi, EpochLabel label);

}  // namespace spectra
