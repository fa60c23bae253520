#pragma once

#include <cstdint>

#include "crbmgen/pianoroll.hpp"
#include "crbmgen/rng.hpp"

namespace synthetic {

/// One `period`-step diatonic motif: onsets favour beats, notes come from a
/// random major scale folded into `pitches` rows.
crbmgen::PianoRoll motif(int period, int pitches, crbmgen::Rng& rng, int pitch_base = 60);

/// A motif of length `period` repeated until `t_steps` rows are filled.
crbmgen::PianoRoll repeating_piece(int t_steps, int pitches, int period, crbmgen::Rng& rng, int pitch_base = 60);

/// `count` repeating pieces, all drawn from one seed.
crbmgen::Corpus pattern_corpus(int count, int t_steps, int pitches, std::uint64_t seed, int period = 32);

/// Four equal sections laid out A A B A, with A and B independent motifs
/// in a shared key.
crbmgen::PianoRoll aaba_piece(int t_steps, int pitches, crbmgen::Rng& rng, int pitch_base = 60);

}  // namespace synthetic
