#include "spectra/spectrum.hpp"

#include <cassert>
#include <sstream>

#include "spectra/transport.hpp"

namespace spectra {

const char* to_string(EpochLabel label) {
  switch (label) {
    case EpochLabel::Unlabeled: return "unlabeled";
    case EpochLabel::Pass: return "pass";
    case EpochLabel::Fail: return "fail";
  }
  return "?";
}

EpochLabel label_from_string(const std::string& s) {
  if (s == "pass") return EpochLabel::Pass;
  if (s == "fail") return EpochLabel::Fail;
  if (s == "unlabeled") return EpochLabel::Unlabeled;
  throw std::invalid_argument("bad label: " + s);
}

void SpectrumPool::IndexFifo::push(std::size_t v) {
  assert(count_ < slots_.size());
  slots_[(head_ + count_) % slots_.size()] = v;
  ++count_;
}

std::size_t SpectrumPool::IndexFifo::front() const {
  assert(count_ > 0);
  return slots_[head_];
}

std::size_t SpectrumPool::IndexFifo::pop() {
  std::size_t v = front();
  head_ = (head_ + 1) % slots_.size();
  --count_;
  return v;
}

SpectrumPool::SpectrumPool(std::size_t n_funcs, std::size_t capacity)
    : n_funcs_(n_funcs), capacity_(capacity), free_(capacity), send_(capacity) {
  buffers_.resize(capacity);
  for (auto& b : buffers_) b.counts.assign(n_funcs, 0);
  if (capacity > 0) {
    current_ = 0;
    buffers_[0].seq = next_seq_++;
    buffers_[0].start_ms = 0;
    for (std::size_t i = 1; i < capacity; ++i) free_.push(i);
  }
}

void SpectrumPool::probe_record(std::size_t id) {
  if (id >= n_funcs_) {
    throw std::out_of_range("probe id " + std::to_string(id) + " out of range (n_funcs=" +
                            std::to_string(n_funcs_) + ")");
  }
  if (!current_) {
    ++dropped_probes_;
    return;
  }
  auto& c = current().counts[id];
  if (c < kCountSaturation) ++c;
}

SpectrumPool::RotateResult SpectrumPool::rotate_epoch(std::int64_t now_ms,
                                                      EpochMeta* rotated) {
  if (!current_ || free_.empty()) {
    ++dropped_rotations_;
    return RotateResult::Extended;
  }
  Buffer& cur = current();
  if (rotated != nullptr) *rotated = EpochMeta{cur.seq, cur.start_ms, cur.label};
  cur.send_pos = 0;
  send_.push(*current_);
  ++rotated_epochs_;

  std::size_t fresh = free_.pop();
  Buffer& next = buffers_[fresh];
  assert(next.counts.size() == n_funcs_);
  next.seq = next_seq_++;
  next.start_ms = now_ms;
  next.label = EpochLabel::Unlabeled;
  next.send_pos = 0;
  current_ = fresh;
  return RotateResult::Rotated;
}

SpectrumPool::DrainResult SpectrumPool::drain_step(FrameTransmitter& tx) {
  if (send_.empty()) return DrainResult::Idle;
  Buffer& head = buffers_[send_.front()];
  std::uint16_t epoch = static_cast<std::uint16_t>(head.seq & 0xFFFF);
  if (head.send_pos < n_funcs_) {
    Frame f{epoch, static_cast<std::uint16_t>(head.send_pos), head.counts[head.send_pos]};
    if (!tx.try_send(f)) return DrainResult::Busy;
    ++head.send_pos;
    return DrainResult::SentCounter;
  }
  Frame end{epoch, kEndMarker, 0};
  if (!tx.try_send(end)) return DrainResult::Busy;
  // Recycle: zero in the idle path so rotation stays O(1).
  std::size_t idx = send_.pop();
  Buffer& b = buffers_[idx];
  b.counts.assign(n_funcs_, 0);
  b.send_pos = 0;
  b.label = EpochLabel::Unlabeled;
  free_.push(idx);
  return DrainResult::SentEnd;
}

void SpectrumPool::label_current(EpochLabel label) {
  if (current_) current().label = label;
}

void SpectrumPool::label_epoch(std::uint64_t epoch_seq, EpochLabel label) {
  if (current_ && current().seq == epoch_seq) {
    current().label = label;
    return;
  }
  // One full rotation of the send queue preserves FIFO order.
  bool found = false;
  const std::size_t n = send_.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx = send_.pop();
    if (buffers_[idx].seq == epoch_seq) {
      buffers_[idx].label = label;
      found = true;
    }
    send_.push(idx);
  }
  if (!found) {
    throw std::out_of_range("epoch " + std::to_string(epoch_seq) + " not pool-resident");
  }
}

std::size_t SpectrumPool::buffers_in_use() const {
  return free_.size() + send_.size() + (current_ ? 1 : 0);
}

std::uint64_t SpectrumPool::current_seq() const { return current().seq; }
std::int64_t SpectrumPool::current_start_ms() const { return current().start_ms; }
const std::vector<std::uint8_t>& SpectrumPool::current_counts() const {
  return current().counts;
}

std::string spectra_log_line(const Spectrum& s) {
  std::string out = "epoch=" + std::to_string(s.epoch_seq) +
                    " t=" + std::to_string(s.start_ms) +
                    " label=" + to_string(s.label) + " counts=";
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(static_cast<unsigned>(s.counts[i]));
  }
  return out;
}

std::string render_spectra_log(const std::vector<Spectrum>& log) {
  std::string out;
  for (const auto& s : log) {
    out += spectra_log_line(s);
    out += '\n';
  }
  return out;
}

namespace {

std::string take_field(const std::string& line, const std::string& key, std::size_t lineno) {
  auto pos = line.find(key + "=");
  if (pos == std::string::npos) {
    throw std::invalid_argument("spectra log line " + std::to_string(lineno) +
                                ": missing " + key + "=");
  }
  pos += key.size() + 1;
  auto end = line.find(' ', pos);
  return line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

}  // namespace

std::vector<Spectrum> parse_spectra_log(const std::string& text) {
  std::vector<Spectrum> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    Spectrum s;
    s.epoch_seq = std::stoull(take_field(line, "epoch", lineno));
    s.start_ms = std::stoll(take_field(line, "t", lineno));
    s.label = label_from_string(take_field(line, "label", lineno));
    std::string counts = take_field(line, "counts", lineno);
    if (!counts.empty()) {
      std::istringstream cs(counts);
      std::string item;
      while (std::getline(cs, item, ',')) {
        unsigned long v = std::stoul(item);
        if (v > kCountSaturation) {
          throw std::invalid_argument("spectra log line " + std::to_string(lineno) +
                                      ": count beyond saturation");
        }
        s.counts.push_back(static_cast<std::uint8_t>(v));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t label_epoch_range(std::vector<Spectrum>& log, std::uint64_t lo,
                              std::uint64_t hi, EpochLabel label) {
  std::size_t n = 0;
  for (auto& s : log) {
    if (s.epoch_seq >= lo && s.epoch_seq <= hi) {
      s.label = label;
      ++n;
    }
  }
  return n;
}

}  // namespace spectra
