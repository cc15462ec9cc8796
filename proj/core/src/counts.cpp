// Copyright 2026 The oamstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oamstore/counts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include "oamstore/error.hpp"
#include "oamstore/random.hpp"
#include "oamstore/text.hpp"
#include "parallel.hpp"

namespace oamstore::counts {

namespace {

void check_channel(int channel) {
  if (channel < 0 || channel > kMaxChannel) {
    throw InvalidArgument("unknown channel " + std::to_string(channel) + " (channels are 0.." +
                          std::to_string(kMaxChannel) + ")");
  }
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

std::vector<std::int64_t> times_on(const TimestampStream& s, int channel) {
  std::vector<std::int64_t> t;
  for (const auto& r : s.records) {
    if (r.channel == channel) t.push_back(r.time_ns);
  }
  return t;
}

}  // namespace

void TimestampStream::validate() const {
  if (bin_width_ns <= 0) throw InvalidArgument("bin_width_ns must be > 0");
  if (pulse_period_ns <= 0) throw InvalidArgument("pulse_period_ns must be > 0");
  if (window_count < 0) throw InvalidArgument("n_windows must be >= 0");
  for (std::size_t i = 0; i < records.size(); ++i) {
    check_channel(records[i].channel);
    if (i > 0 && records[i].time_ns < records[i - 1].time_ns) {
      throw InvalidArgument("timestamp records are not sorted by time at record " + std::to_string(i));
    }
  }
}

std::int64_t TimestampStream::count(int channel) const {
  return std::count_if(records.begin(), records.end(), [&](const auto& r) { return r.channel == channel; });
}

std::string to_text(const TimestampStream& stream) {
  std::string out;
  out += "#bin_width_ns=" + text::format_int(stream.bin_width_ns) + "\n";
  out += "#pulse_period_ns=" + text::format_int(stream.pulse_period_ns) + "\n";
  out += "#n_windows=" + text::format_int(stream.window_count) + "\n";
  out.reserve(out.size() + stream.records.size() * 12);
  for (const auto& r : stream.records) {
    out += text::format_int(r.channel);
    out += ',';
    out += text::format_int(r.time_ns);
    out += '\n';
  }
  return out;
}

TimestampStream timestamp_stream_from_text(std::string_view content) {
  TimestampStream s;
  bool have_bin = false, have_period = false, have_windows = false;
  std::size_t line_no = 0;
  for (auto line : text::lines(content)) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw InvalidArgument("malformed header line " + std::to_string(line_no));
      auto key = line.substr(1, eq - 1);
      auto value = line.substr(eq + 1);
      if (key == "bin_width_ns") {
        s.bin_width_ns = text::parse_int(value, "bin_width_ns");
        have_bin = true;
      } else if (key == "pulse_period_ns") {
        s.pulse_period_ns = text::parse_int(value, "pulse_period_ns");
        have_period = true;
      } else if (key == "n_windows") {
        s.window_count = text::parse_int(value, "n_windows");
        have_windows = true;
      } else {
        throw InvalidArgument("unknown header key '" + std::string(key) + "'");
      }
      continue;
    }
    auto fields = text::split(line, ',');
    if (fields.size() != 2) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected channel,time_ns");
    }
    TimestampRecord r;
    r.channel = static_cast<int>(text::parse_int(fields[0], "channel"));
    r.time_ns = text::parse_int(fields[1], "time_ns");
    s.records.push_back(r);
  }
  if (!have_bin || !have_period || !have_windows) {
    throw InvalidArgument("timestamp stream needs bin_width_ns, pulse_period_ns and n_windows headers");
  }
  s.validate();
  return s;
}

ChannelMap ChannelMap::correlation() { return ChannelMap{{0, 2}, {1, 3}}; }
ChannelMap ChannelMap::hbt() { return ChannelMap{{2, 3}, {1}}; }

void DetectorModel::validate() const {
  if (!(jitter_ns >= 0.0) || !std::isfinite(jitter_ns)) throw InvalidArgument("jitter_ns must be >= 0");
  if (!(dead_time_ns >= 0.0) || !std::isfinite(dead_time_ns)) throw InvalidArgument("dead_time_ns must be >= 0");
  if (bin_width_ns <= 0) throw InvalidArgument("bin_width_ns must be > 0");
}

TimestampStream detect(const source::EmissionRecord& emissions, double transmission_signal1,
                       double transmission_signal2, const ChannelMap& channels, const DetectorModel& detector,
                       std::uint64_t seed) {
  detector.validate();
  for (double eta : {transmission_signal1, transmission_signal2}) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("transmission must lie in [0, 1]");
  }
  for (int c : channels.signal1) check_channel(c);
  for (int c : channels.signal2) check_channel(c);
  if (emissions.pulse_period_ns <= 0) throw InvalidArgument("emission record has no pulse period");

  const std::int64_t bin = detector.bin_width_ns;
  auto work = [&](std::int64_t begin, std::int64_t end, std::vector<TimestampRecord>& out) {
    for (std::int64_t k = begin; k < end; ++k) {
      const auto& w = emissions.windows[static_cast<std::size_t>(k)];
      random::Engine rng(seed, random::Stream::detection, static_cast<std::uint64_t>(w.window));
      std::normal_distribution<double> jitter(0.0, detector.jitter_ns);
      const double base = static_cast<double>(w.window * emissions.pulse_period_ns);
      auto click = [&](const std::vector<int>& chans, double nominal) {
        if (chans.empty()) return;
        std::size_t pick = chans.size() == 1 ? 0 : static_cast<std::size_t>(rng() % chans.size());
        double t = nominal + (detector.jitter_ns > 0.0 ? jitter(rng) : 0.0);
        out.push_back({chans[pick], static_cast<std::int64_t>(std::floor(t / static_cast<double>(bin))) * bin});
      };
      const double t1 = base;
      const double t2 = base + static_cast<double>(emissions.pair_delay_ns);
      for (std::size_t p = 0; p < w.pairs.size(); ++p) {
        if (rng.uniform() < transmission_signal1) click(channels.signal1, t1);
        if (rng.uniform() < transmission_signal2) click(channels.signal2, t2);
      }
      for (int a = 0; a < w.accidentals_signal1; ++a) click(channels.signal1, t1);
      for (int a = 0; a < w.accidentals_signal2; ++a) click(channels.signal2, t2);
    }
  };

  TimestampStream s;
  s.bin_width_ns = bin;
  s.pulse_period_ns = emissions.pulse_period_ns;
  s.window_count = emissions.window_count;
  s.records = detail::parallel_collect<TimestampRecord>(static_cast<std::int64_t>(emissions.windows.size()), work,
                                                        1 << 14);
  std::sort(s.records.begin(), s.records.end(),
            [](const auto& a, const auto& b) { return std::tie(a.time_ns, a.channel) < std::tie(b.time_ns, b.channel); });

  if (detector.dead_time_ns > 0.0) {
    std::unordered_map<int, std::int64_t> last;
    std::vector<TimestampRecord> kept;
    kept.reserve(s.records.size());
    for (const auto& r : s.records) {
      auto it = last.find(r.channel);
      if (it != last.end() && static_cast<double>(r.time_ns - it->second) < detector.dead_time_ns) continue;
      last[r.channel] = r.time_ns;
      kept.push_back(r);
    }
    s.records = std::move(kept);
  }
  return s;
}

std::int64_t CoincidenceHistogram::delay_ns(std::size_t bin) const {
  return -(span_ns / bin_width_ns) * bin_width_ns + static_cast<std::int64_t>(bin) * bin_width_ns;
}

std::uint64_t CoincidenceHistogram::total() const {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

CoincidenceHistogram histogram(const TimestampStream& stream, int trigger, int stop, std::int64_t span_ns) {
  check_channel(trigger);
  check_channel(stop);
  if (span_ns <= 0) throw InvalidArgument("histogram span must be > 0");
  stream.validate();
  CoincidenceHistogram h;
  h.trigger = trigger;
  h.stop = stop;
  h.bin_width_ns = stream.bin_width_ns;
  h.span_ns = span_ns;
  h.pulse_period_ns = stream.pulse_period_ns;
  const std::int64_t half_bins = span_ns / h.bin_width_ns;
  h.counts.assign(static_cast<std::size_t>(2 * half_bins + 1), 0);
  const std::int64_t reach = half_bins * h.bin_width_ns;

  auto starts = times_on(stream, trigger);
  auto stops = times_on(stream, stop);
  std::size_t lo = 0;
  for (std::int64_t t : starts) {
    while (lo < stops.size() && stops[lo] < t - reach) ++lo;
    for (std::size_t k = lo; k < stops.size() && stops[k] <= t + reach; ++k) {
      std::int64_t bin = floor_div(stops[k] - t + reach, h.bin_width_ns);
      ++h.counts[static_cast<std::size_t>(bin)];
    }
  }
  return h;
}

CoincidenceHistogram combine(std::span<const CoincidenceHistogram> parts) {
  if (parts.empty()) throw InvalidArgument("nothing to combine");
  CoincidenceHistogram out = parts.front();
  for (const auto& h : parts.subspan(1)) {
    if (h.bin_width_ns != out.bin_width_ns || h.span_ns != out.span_ns || h.pulse_period_ns != out.pulse_period_ns ||
        h.counts.size() != out.counts.size()) {
      throw InvalidArgument("histograms differ in binning");
    }
    for (std::size_t i = 0; i < h.counts.size(); ++i) out.counts[i] += h.counts[i];
  }
  return out;
}

std::string to_csv(const CoincidenceHistogram& h) {
  std::string out;
  out += "#trigger=" + text::format_int(h.trigger) + "\n";
  out += "#stop=" + text::format_int(h.stop) + "\n";
  out += "#bin_width_ns=" + text::format_int(h.bin_width_ns) + "\n";
  out += "#span_ns=" + text::format_int(h.span_ns) + "\n";
  out += "#pulse_period_ns=" + text::format_int(h.pulse_period_ns) + "\n";
  out += "delay_ns,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += text::format_int(h.delay_ns(i)) + "," + text::format_int(static_cast<std::int64_t>(h.counts[i])) + "\n";
  }
  return out;
}

CoincidenceHistogram histogram_from_csv(std::string_view content) {
  CoincidenceHistogram h;
  std::map<std::string, std::int64_t> meta;
  std::vector<std::pair<std::int64_t, std::uint64_t>> rows;
  bool header_seen = false;
  for (auto line : text::lines(content)) {
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw InvalidArgument("malformed histogram metadata line");
      std::string key(line.substr(1, eq - 1));
      meta[key] = text::parse_int(line.substr(eq + 1), key);
      continue;
    }
    if (!header_seen) {
      if (line != "delay_ns,count") throw InvalidArgument("histogram CSV must start with 'delay_ns,count'");
      header_seen = true;
      continue;
    }
    auto f = text::split(line, ',');
    if (f.size() != 2) throw InvalidArgument("histogram row needs delay_ns,count");
    auto c = text::parse_int(f[1], "count");
    if (c < 0) throw InvalidArgument("histogram count is negative");
    rows.emplace_back(text::parse_int(f[0], "delay_ns"), static_cast<std::uint64_t>(c));
  }
  for (const char* key : {"trigger", "stop", "bin_width_ns", "span_ns", "pulse_period_ns"}) {
    if (!meta.count(key)) throw InvalidArgument(std::string("histogram CSV lacks #") + key);
  }
  h.trigger = static_cast<int>(meta["trigger"]);
  h.stop = static_cast<int>(meta["stop"]);
  h.bin_width_ns = meta["bin_width_ns"];
  h.span_ns = meta["span_ns"];
  h.pulse_period_ns = meta["pulse_period_ns"];
  if (h.bin_width_ns <= 0 || h.span_ns <= 0) throw InvalidArgument("histogram bin width and span must be > 0");
  h.counts.assign(static_cast<std::size_t>(2 * (h.span_ns / h.bin_width_ns) + 1), 0);
  if (rows.size() != h.counts.size()) throw InvalidArgument("histogram row count does not match its span");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != h.delay_ns(i)) throw InvalidArgument("histogram delays are not the expected grid");
    h.counts[i] = rows[i].second;
  }
  return h;
}

Estimate g12_comb_normalized(const CoincidenceHistogram& h, double peak_window_ns,
                             std::optional<std::int64_t> first_peak_center_ns) {
  if (!(peak_window_ns > 0.0)) throw InvalidArgument("peak window must be > 0");
  if (h.counts.empty()) throw EstimatorFailure("empty histogram");
  if (h.pulse_period_ns <= 0) throw InvalidArgument("histogram has no pulse period");

  std::int64_t center;
  if (first_peak_center_ns) {
    center = *first_peak_center_ns;
  } else {
    std::size_t best = 0;
    for (std::size_t i = 1; i < h.counts.size(); ++i) {
      if (h.counts[i] > h.counts[best]) best = i;
    }
    center = h.delay_ns(best);
  }
  const double half = peak_window_ns / 2.0;
  const double first_delay = static_cast<double>(h.delay_ns(0));
  const double last_delay = static_cast<double>(h.delay_ns(h.counts.size() - 1));
  auto inside = [&](double c) { return c - half >= first_delay && c + half <= last_delay; };
  auto integrate = [&](double c) {
    double n = 0.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      if (std::abs(static_cast<double>(h.delay_ns(i)) - c) <= half) n += static_cast<double>(h.counts[i]);
    }
    return n;
  };
  const double c1 = static_cast<double>(center);
  if (!inside(c1)) throw EstimatorFailure("first peak window does not fit inside the histogram");
  const double n1 = integrate(c1);
  double n2 = 0.0;
  int neighbours = 0;
  for (double c : {c1 + static_cast<double>(h.pulse_period_ns), c1 - static_cast<double>(h.pulse_period_ns)}) {
    if (inside(c)) {
      n2 += integrate(c);
      ++neighbours;
    }
  }
  if (neighbours == 0) throw EstimatorFailure("histogram holds fewer than two comb peaks");
  if (n2 <= 0.0) throw EstimatorFailure("normalising comb peak is empty");
  Estimate e;
  e.value = n1 / (n2 / neighbours);
  e.std_error = n1 > 0.0 ? e.value * std::sqrt(1.0 / n1 + 1.0 / n2) : neighbours / n2;
  return e;
}

double cauchy_schwarz_R(double g12, double g11, double g22) {
  if (!(g11 > 0.0) || !(g22 > 0.0)) throw EstimatorFailure("auto-correlations must be positive for R");
  return g12 * g12 / (g11 * g22);
}

Estimate cauchy_schwarz_R(const Estimate& g12, const Estimate& g11, const Estimate& g22) {
  Estimate r;
  r.value = cauchy_schwarz_R(g12.value, g11.value, g22.value);
  double rel = 0.0;
  if (g12.value != 0.0) rel += 4.0 * std::pow(g12.std_error / g12.value, 2);
  rel += std::pow(g11.std_error / g11.value, 2) + std::pow(g22.std_error / g22.value, 2);
  r.std_error = std::abs(r.value) * std::sqrt(rel);
  if (g12.value == 0.0) r.std_error = 2.0 * g12.std_error * std::abs(g12.value) / (g11.value * g22.value);
  return r;
}

HbtCounts hbt_counts(const TimestampStream& stream, int herald, int split_a, int split_b) {
  check_channel(herald);
  check_channel(split_a);
  check_channel(split_b);
  if (herald == split_a || herald == split_b || split_a == split_b) {
    throw InvalidArgument("HBT channels must be distinct");
  }
  stream.validate();
  HbtCounts c;
  std::size_t i = 0;
  const auto& r = stream.records;
  while (i < r.size()) {
    std::int64_t w = floor_div(r[i].time_ns, stream.pulse_period_ns);
    bool h = false, a = false, b = false;
    for (; i < r.size() && floor_div(r[i].time_ns, stream.pulse_period_ns) == w; ++i) {
      h |= r[i].channel == herald;
      a |= r[i].channel == split_a;
      b |= r[i].channel == split_b;
    }
    if (!h) continue;
    ++c.p1;
    if (a) ++c.p12;
    if (b) ++c.p13;
    if (a && b) ++c.p123;
  }
  return c;
}

Estimate alpha(const HbtCounts& c) {
  if (c.p12 == 0 || c.p13 == 0) throw EstimatorFailure("alpha needs non-zero P12 and P13");
  const double p1 = static_cast<double>(c.p1);
  const double p12 = static_cast<double>(c.p12);
  const double p13 = static_cast<double>(c.p13);
  const double p123 = static_cast<double>(c.p123);
  Estimate e;
  e.value = p1 * p123 / (p12 * p13);
  const double p123_floor = std::max(p123, 1.0);
  const double scale = p1 * p123_floor / (p12 * p13);
  e.std_error = scale * std::sqrt(1.0 / p1 + 1.0 / p123_floor + 1.0 / p12 + 1.0 / p13);
  return e;
}

}  // namespace oamstore::counts
