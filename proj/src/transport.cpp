#include "spectra/transport.hpp"

namespace spectra {

namespace {

const char* fault_name(CodecFault f) {
  switch (f) {
    case CodecFault::FieldRange: return "FieldRange";
    case CodecFault::BadMagic: return "BadMagic";
    case CodecFault::ChecksumMismatch: return "ChecksumMismatch";
    case CodecFault::CountRange: return "CountRange";
  }
  return "?";
}

}  // namespace

CodecError::CodecError(CodecFault f, const std::string& detail)
    : std::runtime_error(std::string(fault_name(f)) + (detail.empty() ? "" : ": " + detail)),
      fault(f) {}

std::array<std::uint8_t, kFrameSize> encode_frame(const Frame& f) {
  if (f.is_end()) {
    if (f.count != 0) throw CodecError(CodecFault::FieldRange, "END frame carries a count");
  } else if (f.count > kCountSaturation) {
    throw CodecError(CodecFault::FieldRange, "count beyond saturation");
  }
  std::array<std::uint8_t, kFrameSize> out{};
  out[0] = kFrameMagic;
  out[1] = static_cast<std::uint8_t>(f.epoch_seq >> 8);
  out[2] = static_cast<std::uint8_t>(f.epoch_seq & 0xFF);
  out[3] = static_cast<std::uint8_t>(f.counter_index >> 8);
  out[4] = static_cast<std::uint8_t>(f.counter_index & 0xFF);
  out[5] = f.count;
  std::uint8_t chk = 0;
  for (std::size_t i = 0; i < kFrameSize - 1; ++i) chk ^= out[i];
  out[6] = chk;
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kFrameSize) {
    throw CodecError(CodecFault::FieldRange,
                     "expected " + std::to_string(kFrameSize) + " bytes");
  }
  if (bytes[0] != kFrameMagic) throw CodecError(CodecFault::BadMagic, "");
  std::uint8_t chk = 0;
  for (std::size_t i = 0; i < kFrameSize - 1; ++i) chk ^= bytes[i];
  if (chk != bytes[6]) throw CodecError(CodecFault::ChecksumMismatch, "");
  Frame f;
  f.epoch_seq = static_cast<std::uint16_t>((bytes[1] << 8) | bytes[2]);
  f.counter_index = static_cast<std::uint16_t>((bytes[3] << 8) | bytes[4]);
  f.count = bytes[5];
  if (f.is_end()) {
    if (f.count != 0) throw CodecError(CodecFault::CountRange, "END frame carries a count");
  } else if (f.count > kCountSaturation) {
    throw CodecError(CodecFault::CountRange, "");
  }
  return f;
}

SerialChannel::SerialChannel(std::int64_t bytes_per_second, std::size_t buffer_limit)
    : bytes_per_second_(bytes_per_second),
      per_byte_us_((1'000'000 + bytes_per_second - 1) / bytes_per_second),
      buffer_limit_(buffer_limit) {
  if (bytes_per_second <= 0) throw std::invalid_argument("bytes_per_second must be positive");
}

bool SerialChannel::send(std::span<const std::uint8_t> bytes, std::int64_t now_us) {
  if (!can_accept(bytes.size())) return false;
  std::int64_t start = std::max(now_us, line_free_us_);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    in_flight_.push_back({bytes[i], start + static_cast<std::int64_t>(i + 1) * per_byte_us_});
  }
  line_free_us_ = start + static_cast<std::int64_t>(bytes.size()) * per_byte_us_;
  return true;
}

std::vector<std::uint8_t> SerialChannel::poll(std::int64_t now_us) {
  std::vector<std::uint8_t> out;
  while (!in_flight_.empty() && in_flight_.front().ready_us <= now_us) {
    out.push_back(in_flight_.front().byte);
    in_flight_.pop_front();
  }
  return out;
}

std::optional<std::int64_t> SerialChannel::next_ready_us() const {
  if (in_flight_.empty()) return std::nullopt;
  return in_flight_.front().ready_us;
}

IncompleteSpectrum::IncompleteSpectrum(std::uint16_t e, std::vector<std::uint16_t> m)
    : std::runtime_error("epoch " + std::to_string(e) + " ended with " +
                         std::to_string(m.size()) + " counter(s) missing"),
      epoch(e),
      missing(std::move(m)) {}

EpochRegression::EpochRegression(std::uint16_t e, std::uint16_t last)
    : std::runtime_error("epoch " + std::to_string(e) + " after completed epoch " +
                         std::to_string(last)) {}

Reassembler::Reassembler(std::size_t n_funcs)
    : n_funcs_(n_funcs), counts_(n_funcs, 0), seen_(n_funcs, false) {}

std::optional<Spectrum> Reassembler::feed_byte(std::uint8_t b) {
  acc_[acc_len_++] = b;
  if (acc_len_ < kFrameSize) return std::nullopt;
  acc_len_ = 0;
  return feed_frame(decode_frame(acc_));
}

std::optional<Spectrum> Reassembler::feed_frame(const Frame& f) {
  if (last_completed_ && f.epoch_seq < *last_completed_) {
    throw EpochRegression(f.epoch_seq, *last_completed_);
  }
  if (in_progress_ && f.epoch_seq != epoch_) {
    // The sender finishes one spectrum before starting the next, so a new
    // epoch mid-accumulation means counters went missing.
    std::vector<std::uint16_t> missing;
    for (std::uint16_t i = 0; i < n_funcs_; ++i) {
      if (!seen_[i]) missing.push_back(i);
    }
    throw IncompleteSpectrum(epoch_, std::move(missing));
  }

  if (f.is_end()) {
    if (!in_progress_ && n_funcs_ > 0) {
      std::vector<std::uint16_t> missing;
      for (std::uint16_t i = 0; i < n_funcs_; ++i) missing.push_back(i);
      throw IncompleteSpectrum(f.epoch_seq, std::move(missing));
    }
    if (seen_count_ != n_funcs_) {
      std::vector<std::uint16_t> missing;
      for (std::uint16_t i = 0; i < n_funcs_; ++i) {
        if (!seen_[i]) missing.push_back(i);
      }
      throw IncompleteSpectrum(epoch_, std::move(missing));
    }
    Spectrum s;
    s.epoch_seq = f.epoch_seq;
    s.counts = counts_;
    last_completed_ = f.epoch_seq;
    ++completed_count_;
    in_progress_ = false;
    seen_.assign(n_funcs_, false);
    seen_count_ = 0;
    counts_.assign(n_funcs_, 0);
    return s;
  }

  if (f.counter_index >= n_funcs_) {
    throw CodecError(CodecFault::FieldRange,
                     "counter index " + std::to_string(f.counter_index) +
                         " outside n_funcs=" + std::to_string(n_funcs_));
  }
  if (!in_progress_) {
    in_progress_ = true;
    epoch_ = f.epoch_seq;
  }
  if (!seen_[f.counter_index]) ++seen_count_;
  seen_[f.counter_index] = true;
  counts_[f.counter_index] = f.count;
  return std::nullopt;
}

}  // namespace spectra
