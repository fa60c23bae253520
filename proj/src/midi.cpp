#include "crbmgen/midi.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <string>
#include <tuple>
#include <utility>

#include "crbmgen/binary_io.hpp"

namespace crbmgen {

namespace {

class MidiCursor {
 public:
  MidiCursor(const std::vector<std::uint8_t>& bytes, std::size_t begin, std::size_t end)
      : bytes_(bytes), pos_(begin), end_(end) {}

  bool done() const { return pos_ >= end_; }
  std::size_t pos() const { return pos_; }

  std::uint8_t byte() {
    if (pos_ >= end_) throw MidiParseError("MIDI: truncated track");
    return bytes_[pos_++];
  }
  std::uint8_t peek() const {
    if (pos_ >= end_) throw MidiParseError("MIDI: truncated track");
    return bytes_[pos_];
  }
  std::uint32_t varlen() {
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = byte();
      value = (value << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return value;
    }
    throw MidiParseError("MIDI: variable-length quantity longer than 4 bytes");
  }
  void skip(std::size_t n) {
    if (end_ - pos_ < n) throw MidiParseError("MIDI: truncated event");
    pos_ += n;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_;
  std::size_t end_;
};

std::uint32_t read_be(const std::vector<std::uint8_t>& b, std::size_t pos, int width) {
  if (b.size() < pos + static_cast<std::size_t>(width)) throw MidiParseError("MIDI: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | b[pos + i];
  return v;
}

bool tag_at(const std::vector<std::uint8_t>& b, std::size_t pos, const char* tag) {
  return b.size() >= pos + 4 && std::equal(tag, tag + 4, b.begin() + static_cast<std::ptrdiff_t>(pos));
}

void parse_track(MidiCursor& cur, std::vector<TickNote>& notes) {
  std::int64_t tick = 0;
  std::uint8_t running = 0;
  // (channel, pitch) -> onset ticks of sounding notes, oldest first
  std::map<std::pair<int, int>, std::deque<std::int64_t>> open;

  auto close_note = [&](int channel, int pitch) {
    auto it = open.find({channel, pitch});
    if (it == open.end() || it->second.empty()) return;
    notes.push_back({it->second.front(), tick, pitch});
    it->second.pop_front();
  };

  while (!cur.done()) {
    tick += cur.varlen();
    std::uint8_t status = cur.peek();
    if (status & 0x80) {
      cur.byte();
    } else {
      if (running == 0) throw MidiParseError("MIDI: data byte without running status");
      status = running;
    }

    if (status == 0xFF) {
      running = 0;
      const std::uint8_t type = cur.byte();
      const std::uint32_t len = cur.varlen();
      cur.skip(len);
      if (type == 0x2F) break;  // end of track
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      running = 0;
      cur.skip(cur.varlen());
      continue;
    }
    if (status >= 0xF0) throw MidiParseError("MIDI: unexpected system message in track");

    running = status;
    const int kind = status & 0xF0;
    const int channel = status & 0x0F;
    if (kind == 0xC0 || kind == 0xD0) {
      cur.byte();
      continue;
    }
    const std::uint8_t data1 = cur.byte();
    const std::uint8_t data2 = cur.byte();
    if ((data1 | data2) & 0x80) throw MidiParseError("MIDI: data byte with high bit set");
    if (kind == 0x90 && data2 > 0) {
      open[{channel, data1}].push_back(tick);
    } else if (kind == 0x80 || kind == 0x90) {
      close_note(channel, data1);
    }
  }
  for (auto& [key, onsets] : open) {
    for (std::int64_t onset : onsets) notes.push_back({onset, tick, key.second});
  }
}

}  // namespace

MidiFile parse_midi(const std::vector<std::uint8_t>& bytes) {
  if (!tag_at(bytes, 0, "MThd")) throw MidiParseError("MIDI: missing MThd header");
  const std::uint32_t header_len = read_be(bytes, 4, 4);
  if (header_len < 6) throw MidiParseError("MIDI: header too short");
  const std::uint32_t format = read_be(bytes, 8, 2);
  const std::uint32_t tracks = read_be(bytes, 10, 2);
  const std::uint32_t division = read_be(bytes, 12, 2);
  if (format > 1) throw MidiParseError("MIDI: only formats 0 and 1 are supported");
  if (division & 0x8000) throw MidiParseError("MIDI: SMPTE time division is not supported");
  if (division == 0) throw MidiParseError("MIDI: zero ticks per quarter note");

  MidiFile midi;
  midi.ticks_per_quarter = static_cast<int>(division);
  std::size_t pos = 8 + static_cast<std::size_t>(header_len);
  std::uint32_t seen = 0;
  while (seen < tracks) {
    if (bytes.size() < pos + 8) throw MidiParseError("MIDI: missing track chunk");
    const std::uint32_t len = read_be(bytes, pos + 4, 4);
    const std::size_t body = pos + 8;
    if (bytes.size() - body < len) throw MidiParseError("MIDI: truncated track chunk");
    if (tag_at(bytes, pos, "MTrk")) {
      MidiCursor cur(bytes, body, body + len);
      parse_track(cur, midi.notes);
      ++seen;
    }
    pos = body + len;
  }
  std::stable_sort(midi.notes.begin(), midi.notes.end(), [](const TickNote& a, const TickNote& b) {
    return std::tie(a.onset_tick, a.midi_pitch) < std::tie(b.onset_tick, b.midi_pitch);
  });
  return midi;
}

int quantize_tick(std::int64_t tick, int ticks_per_quarter) {
  // nearest multiple of ppq/4, halves rounded up: floor((8*tick + ppq) / (2*ppq))
  const std::int64_t num = 8 * tick + ticks_per_quarter;
  const std::int64_t den = 2 * static_cast<std::int64_t>(ticks_per_quarter);
  std::int64_t q = num / den;
  if (num % den != 0 && num < 0) --q;
  return static_cast<int>(q);
}

std::vector<NoteEvent> quantize_notes(const MidiFile& midi) {
  std::vector<NoteEvent> out;
  out.reserve(midi.notes.size());
  for (const TickNote& n : midi.notes) {
    const int on = quantize_tick(n.onset_tick, midi.ticks_per_quarter);
    const int off = quantize_tick(n.offset_tick, midi.ticks_per_quarter);
    out.push_back({on, std::max(1, off - on), n.midi_pitch});
  }
  return out;
}

IngestResult notes_to_pianoroll(std::vector<NoteEvent> notes, const IngestConfig& cfg) {
  if (cfg.pitch_count <= 0 || cfg.t_steps < 0 || cfg.length_multiple <= 0) {
    throw DimensionError("invalid ingest configuration");
  }
  int out_of_range = 0;
  int beyond_end = 0;
  std::vector<NoteEvent> kept;
  for (const NoteEvent& n : notes) {
    const int row = n.midi_pitch - cfg.pitch_base;
    if (row < 0 || row >= cfg.pitch_count) {
      ++out_of_range;
    } else if (n.onset_step < 0 || (cfg.t_steps > 0 && n.onset_step >= cfg.t_steps)) {
      ++beyond_end;
    } else {
      kept.push_back(n);
    }
  }
  if (kept.empty()) throw EmptyPieceError("no notes inside the piano-roll range");

  std::sort(kept.begin(), kept.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return std::tie(a.midi_pitch, a.onset_step, a.duration_steps) <
           std::tie(b.midi_pitch, b.onset_step, b.duration_steps);
  });

  // [begin, end) spans per pitch after resolving collisions
  std::vector<std::tuple<int, int, int>> spans;
  int last_end = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const NoteEvent& n = kept[i];
    int end = n.onset_step + n.duration_steps;
    if (i + 1 < kept.size() && kept[i + 1].midi_pitch == n.midi_pitch) {
      const int next_on = kept[i + 1].onset_step;
      end = std::min(end, next_on);
      if (end == next_on && end - n.onset_step > 1) --end;
    }
    spans.emplace_back(n.midi_pitch - cfg.pitch_base, n.onset_step, end);
    last_end = std::max(last_end, n.onset_step + n.duration_steps);
  }

  int t_steps = cfg.t_steps;
  if (t_steps == 0) {
    t_steps = ((last_end + cfg.length_multiple - 1) / cfg.length_multiple) * cfg.length_multiple;
  }
  IngestResult result{PianoRoll(t_steps, cfg.pitch_count, cfg.pitch_base), out_of_range, beyond_end};
  for (const auto& [row, begin, end] : spans) {
    for (int t = begin; t < std::min(end, t_steps); ++t) result.roll(t, row) = 1.0;
  }
  return result;
}

IngestResult midi_to_pianoroll(const std::vector<std::uint8_t>& midi_bytes, const IngestConfig& cfg) {
  const MidiFile midi = parse_midi(midi_bytes);
  if (midi.notes.empty()) throw EmptyPieceError("MIDI file contains no note events");
  return notes_to_pianoroll(quantize_notes(midi), cfg);
}

IngestResult load_midi(const std::filesystem::path& path, const IngestConfig& cfg) {
  return midi_to_pianoroll(io::read_file(path), cfg);
}

std::vector<NoteEvent> pianoroll_to_notes(const PianoRoll& roll, double threshold) {
  std::vector<NoteEvent> notes;
  for (int p = 0; p < roll.pitch_count(); ++p) {
    int t = 0;
    while (t < roll.t_steps()) {
      if (roll(t, p) < threshold) {
        ++t;
        continue;
      }
      const int begin = t;
      while (t < roll.t_steps() && roll(t, p) >= threshold) ++t;
      notes.push_back({begin, t - begin, roll.pitch_base() + p});
    }
  }
  std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return std::tie(a.onset_step, a.midi_pitch) < std::tie(b.onset_step, b.midi_pitch);
  });
  return notes;
}

std::vector<std::uint8_t> pianoroll_to_midi(const PianoRoll& roll, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error("export threshold must lie in (0,1)");

  struct Event {
    std::int64_t tick;
    int order;  // note-offs before note-ons at equal ticks
    int pitch;
  };
  std::vector<Event> events;
  for (const NoteEvent& n : pianoroll_to_notes(roll, threshold)) {
    if (n.midi_pitch < 0 || n.midi_pitch > 127) continue;
    events.push_back({static_cast<std::int64_t>(n.onset_step) * kExportTicksPerStep, 1, n.midi_pitch});
    events.push_back({static_cast<std::int64_t>(n.onset_step + n.duration_steps) * kExportTicksPerStep, 0,
                      n.midi_pitch});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.tick, a.order, a.pitch) < std::tie(b.tick, b.order, b.pitch);
  });

  io::ByteWriter track;
  auto varlen = [&track](std::uint32_t v) {
    std::uint8_t buf[5];
    int n = 0;
    buf[n++] = v & 0x7F;
    while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
    while (n > 0) track.u8(buf[--n]);
  };
  // tempo 500000 us per quarter = 120 BPM
  varlen(0);
  for (std::uint8_t b : {0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20}) track.u8(b);
  std::int64_t now = 0;
  for (const Event& e : events) {
    varlen(static_cast<std::uint32_t>(e.tick - now));
    now = e.tick;
    track.u8(e.order == 1 ? 0x90 : 0x80);
    track.u8(static_cast<std::uint8_t>(e.pitch));
    track.u8(e.order == 1 ? 80 : 0);
  }
  varlen(0);
  for (std::uint8_t b : {0xFF, 0x2F, 0x00}) track.u8(b);

  io::ByteWriter file;
  file.magic("MThd");
  file.u32_be(6);
  file.u16_be(0);
  file.u16_be(1);
  file.u16_be(kExportTicksPerQuarter);
  file.magic("MTrk");
  file.u32_be(static_cast<std::uint32_t>(track.bytes().size()));
  file.raw(track.bytes());
  return file.take();
}

}  // namespace crbmgen
