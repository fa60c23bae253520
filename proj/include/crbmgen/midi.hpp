#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "crbmgen/pianoroll.hpp"

namespace crbmgen {

/// A note on the sixteenth-note grid.
struct NoteEvent {
  int onset_step = 0;
  int duration_steps = 1;
  int midi_pitch = 60;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// A note as found in the file, in ticks.
struct TickNote {
  std::int64_t onset_tick = 0;
  std::int64_t offset_tick = 0;
  int midi_pitch = 60;
};

struct MidiFile {
  int ticks_per_quarter = 480;
  std::vector<TickNote> notes;
};

struct IngestConfig {
  int pitch_base = kDefaultPitchBase;
  int pitch_count = kDefaultPitchCount;
  /// Fixed roll length; 0 derives it from the last note offset.
  int t_steps = 0;
  /// Derived lengths are rounded up to a multiple of this (one 4/4 bar).
  int length_multiple = 16;
};

struct IngestResult {
  PianoRoll roll;
  int dropped_out_of_range = 0;
  int dropped_beyond_end = 0;
};

/// Parses a format 0/1 Standard MIDI File with PPQ timing. Note-on with
/// velocity 0 counts as note-off; unmatched note-ons end at the track end.
MidiFile parse_midi(const std::vector<std::uint8_t>& bytes);

/// Rounds a tick position to the nearest sixteenth step; exact midpoints
/// go to the later step.
int quantize_tick(std::int64_t tick, int ticks_per_quarter);

/// Quantizes every note onto the sixteenth grid. Durations are at least one step.
std::vector<NoteEvent> quantize_notes(const MidiFile& midi);

/// Renders grid notes into a binary roll. Back-to-back notes at one pitch are
/// separated by shortening the earlier note by one step when it is longer than
/// one step; otherwise they merge. Out-of-range pitches are dropped.
IngestResult notes_to_pianoroll(std::vector<NoteEvent> notes, const IngestConfig& cfg);

/// parse_midi + quantize_notes + notes_to_pianoroll. Throws EmptyPieceError
/// when no note lands inside the roll.
IngestResult midi_to_pianoroll(const std::vector<std::uint8_t>& midi_bytes, const IngestConfig& cfg);
IngestResult load_midi(const std::filesystem::path& path, const IngestConfig& cfg);

/// Maximal runs of entries >= threshold at each pitch, ordered by onset then pitch.
std::vector<NoteEvent> pianoroll_to_notes(const PianoRoll& roll, double threshold = 0.5);

inline constexpr int kExportTicksPerQuarter = 480;
inline constexpr int kExportTicksPerStep = 120;

/// Format 0 SMF at 480 PPQ and 120 BPM; one step is 120 ticks.
std::vector<std::uint8_t> pianoroll_to_midi(const PianoRoll& roll, double threshold = 0.5);

}  // namespace crbmgen
