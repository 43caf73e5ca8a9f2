#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectra/spectrum.hpp"

namespace spectra {

inline constexpr std::uint8_t kFrameMagic = 0xA5;
inline constexpr std::uint16_t kEndMarker = 0xFFFF;
inline constexpr std::size_t kFrameSize = 7;

// One counter of one spectrum. counter_index 0xFFFF marks the end of an
// epoch (count must be 0 there).
struct Frame {
  std::uint16_t epoch_seq = 0;
  std::uint16_t counter_index = 0;
  std::uint8_t count = 0;

  bool is_end() const { return counter_index == kEndMarker; }
  bool operator==(const Frame&) const = default;
};

enum class CodecFault { FieldRange, BadMagic, ChecksumMismatch, CountRange };

class CodecError : public std::runtime_error {
 public:
  CodecError(CodecFault fault, const std::string& detail);
  CodecFault fault;
};

// Wire layout (normative, big-endian):
//   [0xA5, epoch_hi, epoch_lo, index_hi, index_lo, count, checksum]
// checksum = XOR of the six preceding bytes.
std::array<std::uint8_t, kFrameSize> encode_frame(const Frame& f);
Frame decode_frame(std::span<const std::uint8_t> bytes);

// Bandwidth-limited, in-order, lossless byte pipe with a bounded in-flight
// buffer. Times are virtual microseconds; each byte occupies the line for
// ceil(1e6 / bytes_per_second) us.
class SerialChannel {
 public:
  explicit SerialChannel(std::int64_t bytes_per_second, std::size_t buffer_limit = 64);

  // All-or-nothing: false (busy) leaves nothing enqueued.
  bool send(std::span<const std::uint8_t> bytes, std::int64_t now_us);
  // Pops every byte whose transmission has finished by now_us, in order.
  std::vector<std::uint8_t> poll(std::int64_t now_us);

  std::size_t in_flight() const { return in_flight_.size(); }
  bool can_accept(std::size_t n) const { return in_flight_.size() + n <= buffer_limit_; }
  // Earliest time poll() would return another byte; nullopt when empty.
  std::optional<std::int64_t> next_ready_us() const;

  std::int64_t bytes_per_second() const { return bytes_per_second_; }
  std::int64_t per_byte_us() const { return per_byte_us_; }

 private:
  struct InFlight {
    std::uint8_t byte;
    std::int64_t ready_us;
  };

  std::int64_t bytes_per_second_;
  std::int64_t per_byte_us_;
  std::size_t buffer_limit_;
  std::deque<InFlight> in_flight_;
  std::int64_t line_free_us_ = 0;
};

class IncompleteSpectrum : public std::runtime_error {
 public:
  IncompleteSpectrum(std::uint16_t epoch, std::vector<std::uint16_t> missing);
  std::uint16_t epoch;
  std::vector<std::uint16_t> missing;
};

class EpochRegression : public std::runtime_error {
 public:
  EpochRegression(std::uint16_t epoch, std::uint16_t last_completed);
};

// Receiver-side accumulation of frames back into spectra. Frames must arrive
// in channel order; an END frame completes the epoch only when every counter
// index has been seen.
class Reassembler {
 public:
  explicit Reassembler(std::size_t n_funcs);

  // Byte-stream entry point; returns a spectrum when one completes.
  std::optional<Spectrum> feed_byte(std::uint8_t b);
  std::optional<Spectrum> feed_frame(const Frame& f);

  bool mid_epoch() const { return in_progress_; }
  std::size_t completed() const { return completed_count_; }

 private:
  std::size_t n_funcs_;
  std::array<std::uint8_t, kFrameSize> acc_{};
  std::size_t acc_len_ = 0;
  bool in_progress_ = false;
  std::uint16_t epoch_ = 0;
  std::vector<std::uint8_t> counts_;
  std::vector<bool> seen_;
  std::size_t seen_count_ = 0;
  std::optional<std::uint16_t> last_completed_;
  std::size_t completed_count_ = 0;
};

}  // namespace spectra
