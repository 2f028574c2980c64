#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace advaudio {

// The 12 instrument labels in their fixed (alphabetical) order. Index into
// this array is the class index used everywhere else.
inline constexpr std::array<const char*, 12> kLabels = {
    "Accordion",       "Acoustic_guitar", "Bass_drum",    "Bass_guitar",
    "Electric_guitar", "Female_singing",  "Glockenspiel", "Gong",
    "Harmonica",       "Hi-hat",          "Male_singing", "Marimba_and_xylophone",
};

inline constexpr int kNumClasses = 12;
inline constexpr int kGongClass = 7;

// Returns the class index of a label, or -1 if it is not one of the 12.
int label_index(const std::string& label);

struct Waveform {
    std::vector<double> samples;  // amplitudes in [-1, 1]
    int sample_rate = 0;

    std::size_t size() const { return samples.size(); }
    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

struct ManifestEntry {
    std::string fname;
    int label = -1;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    // label_set is kLabels; kept implicit since the order is fixed.
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::uint64_t seed = 0;
};

// Reads a RIFF PCM WAV file and mixes all channels down to mono by their
// arithmetic mean. Accepts 8/16/24/32-bit integer and 32/64-bit float PCM.
// Throws std::runtime_error on unreadable files, non-PCM encodings, or
// zero-length audio.
Waveform load_wav(const std::string& path);

// Writes a 16-bit PCM mono file at w.sample_rate. Samples are clipped to
// [-1, 1] before quantization.
void save_wav(const Waveform& w, const std::string& path);

// Band-limited sample-rate conversion (Kaiser-windowed sinc, 64 taps,
// polyphase tables per output phase). Equal rates return the input
// unchanged. Output length is round(len * target_rate / source_rate).
Waveform resample(const Waveform& w, int target_rate);

// Deterministic unstratified split: a seeded shuffle of entry indices, the
// first train_count indices go to train. Throws if train_count is not in
// (0, |entries|).
Split split_dataset(const DatasetManifest& m, std::size_t train_count, std::uint64_t seed);

// Parses a "fname,label" CSV (header row required). Rows whose label is not
// one of the 12 instrument labels are dropped; multi-label rows (quoted,
// comma separated) never match and are dropped too. total_rows, when given,
// receives the number of data rows seen before filtering.
DatasetManifest load_manifest(const std::string& path, std::size_t* total_rows = nullptr);

void save_manifest(const DatasetManifest& m, const std::string& path);

// Split persistence: {"train":[...], "validation":[...], "seed":N}.
void save_split(const Split& s, const std::string& path);
Split load_split(const std::string& path);

}  // namespace advaudio
