#include "spectra/diagnosis.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace spectra {

std::size_t SpectraSet::n_funcs() const {
  return spectra.empty() ? 0 : spectra.front().counts.size();
}

std::set<std::size_t> hit_set(const Spectrum& s) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    if (s.counts[i] > 0) out.insert(i);
  }
  return out;
}

namespace {

void check_shapes(const SpectraSet& set, std::size_t n_funcs, const char* which) {
  if (set.spectra.empty()) {
    throw ShapeMismatch(std::string(which) + " set is empty");
  }
  for (const auto& s : set.spectra) {
    if (s.counts.size() != n_funcs) {
      throw ShapeMismatch(std::string(which) + " set mixes spectrum lengths");
    }
  }
}

std::vector<SuspectEntry> one_sided(const std::vector<Spectrum>& in_role,
                                    const std::set<std::size_t>& other_union,
                                    const Manifest& manifest) {
  std::map<std::size_t, std::size_t> active_epochs;
  for (const auto& s : in_role) {
    for (std::size_t id : hit_set(s)) ++active_epochs[id];
  }
  std::vector<SuspectEntry> out;
  for (const auto& [id, evidence] : active_epochs) {
    if (other_union.count(id)) continue;
    SuspectEntry e;
    e.id = id;
    e.name = id < manifest.n_funcs() ? manifest.name_of(id) : "id" + std::to_string(id);
    e.evidence = evidence;
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const SuspectEntry& a, const SuspectEntry& b) {
    if (a.evidence != b.evidence) return a.evidence > b.evidence;
    return a.id < b.id;
  });
  return out;
}

}  // namespace

DiagnosisReport suspects(const SpectraSet& pass, const SpectraSet& fail,
                         const Manifest& manifest) {
  check_shapes(pass, pass.n_funcs(), "pass");
  check_shapes(fail, fail.n_funcs(), "fail");
  if (pass.n_funcs() != fail.n_funcs()) {
    throw ShapeMismatch("pass and fail sets have different spectrum lengths");
  }

  std::set<std::size_t> pass_union;
  for (const auto& s : pass.spectra) {
    auto h = hit_set(s);
    pass_union.insert(h.begin(), h.end());
  }
  std::set<std::size_t> fail_union;
  for (const auto& s : fail.spectra) {
    auto h = hit_set(s);
    fail_union.insert(h.begin(), h.end());
  }

  DiagnosisReport report;
  report.suspects_fail_only = one_sided(fail.spectra, pass_union, manifest);
  report.suspects_pass_only = one_sided(pass.spectra, fail_union, manifest);
  report.n_pass_epochs = pass.spectra.size();
  report.n_fail_epochs = fail.spectra.size();
  report.pass_selector = pass.selector;
  report.fail_selector = fail.selector;
  return report;
}

std::optional<double> accuracy(const DiagnosisReport& report,
                               const std::set<std::size_t>& truth_ids,
                               const Manifest& manifest) {
  for (std::size_t id : truth_ids) {
    if (id >= manifest.n_funcs()) {
      throw std::out_of_range("truth id " + std::to_string(id) + " not in manifest");
    }
  }
  if (report.suspects_fail_only.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (const auto& s : report.suspects_fail_only) {
    if (truth_ids.count(s.id)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(report.suspects_fail_only.size());
}

LoadDelta load_delta(std::span<const LoadSample> samples, LoadWindow a, LoadWindow b) {
  auto mean_of = [&](LoadWindow w) {
    if (w.first_second > w.last_second) throw EmptyWindow("window bounds reversed");
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : samples) {
      if (s.second_index >= w.first_second && s.second_index <= w.last_second) {
        sum += s.load();
        ++n;
      }
    }
    if (n == 0) throw EmptyWindow("window matches no samples");
    return sum / static_cast<double>(n);
  };
  LoadDelta d;
  d.mean_a = mean_of(a);
  d.mean_b = mean_of(b);
  d.delta_points = (d.mean_b - d.mean_a) * 100.0;
  return d;
}

std::string render_report(const DiagnosisReport& report, bool with_accuracy) {
  std::string out;
  out += "# pass selector=" + report.pass_selector +
         " epochs=" + std::to_string(report.n_pass_epochs) + "\n";
  out += "# fail selector=" + report.fail_selector +
         " epochs=" + std::to_string(report.n_fail_epochs) + "\n";
  for (const auto& s : report.suspects_fail_only) {
    out += "SUSPECT " + std::to_string(s.id) + " " + s.name + " evidence=" +
           std::to_string(s.evidence) + "/" + std::to_string(report.n_fail_epochs) + "\n";
  }
  for (const auto& s : report.suspects_pass_only) {
    out += "PASS-ONLY " + std::to_string(s.id) + " " + s.name + " evidence=" +
           std::to_string(s.evidence) + "/" + std::to_string(report.n_pass_epochs) + "\n";
  }
  if (with_accuracy) {
    if (report.accuracy) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", *report.accuracy);
      out += std::string("accuracy=") + buf + "\n";
    } else {
      out += "accuracy=n/a\n";
    }
  }
  return out;
}

std::vector<std::uint64_t> parse_epoch_selector(const std::string& text) {
  std::vector<std::uint64_t> out;
  if (text.empty()) throw std::invalid_argument("empty epoch selector");
  auto dots = text.find("..");
  if (dots != std::string::npos) {
    std::uint64_t lo = std::stoull(text.substr(0, dots));
    std::uint64_t hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("selector range reversed: " + text);
    for (std::uint64_t e = lo; e <= hi; ++e) out.push_back(e);
    return out;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
    if (item.empty()) throw std::invalid_argument("empty item in selector: " + text);
    out.push_back(std::stoull(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

SpectraSet select_spectra(const std::vector<Spectrum>& log, const std::string& selector,
                          SetRole role) {
  SpectraSet set;
  set.selector = selector;
  set.role = role;
  std::map<std::uint64_t, const Spectrum*> by_seq;
  for (const auto& s : log) by_seq[s.epoch_seq] = &s;
  for (std::uint64_t e : parse_epoch_selector(selector)) {
    auto it = by_seq.find(e);
    if (it == by_seq.end()) {
      throw std::out_of_range("selector epoch " + std::to_string(e) + " not in log");
    }
    Spectrum copy = *it->second;
    copy.label = role == SetRole::Pass ? EpochLabel::Pass : EpochLabel::Fail;
    set.spectra.push_back(std::move(copy));
  }
  return set;
}

}  // namespace spectra
