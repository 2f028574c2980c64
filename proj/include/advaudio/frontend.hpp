#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "advaudio/audio_io.hpp"

namespace advaudio::dsp {

// Waveform -> normalized log-mel pipeline:
//   |STFT|^2 -> mel filterbank -> 10*log10(max(., db_floor)) -> (x-mean)/std
// STFT framing is centered: the signal is reflect-padded by fft_size/2 on
// each side, frames start every `hop` samples, each windowed by a periodic
// Hann of length fft_size.
struct FrontendConfig {
    int fft_size = 2048;
    int hop = 512;
    int n_mels = 100;
    double f_min = 40.0;
    double f_max = 8000.0;
    double db_floor = 1e-10;
    std::vector<double> norm_mean;  // per mel band; empty means all zeros
    std::vector<double> norm_std;   // per mel band; empty means all ones

    void validate(int sample_rate) const;  // throws std::invalid_argument
};

struct MelSpectrogram {
    std::vector<double> values;  // [n_mels x n_frames], row-major
    int n_mels = 0;
    int n_frames = 0;

    double& at(int m, int t) { return values[static_cast<std::size_t>(m) * n_frames + t]; }
    double at(int m, int t) const { return values[static_cast<std::size_t>(m) * n_frames + t]; }
};

// Everything backward_frontend needs from the forward pass.
struct FrontendTape {
    FrontendConfig cfg;
    int sample_rate = 0;
    std::size_t input_len = 0;
    int n_frames = 0;
    std::vector<std::complex<double>> spectra;  // [n_frames x (fft/2+1)]
    std::vector<double> mel_power;              // [n_mels x n_frames], pre-dB
};

// Triangular mel filterbank, [n_mels x (fft_size/2+1)] row-major. Slaney mel
// scale, no area normalization (triangle peaks at 1).
std::vector<double> mel_filterbank(int n_mels, int fft_size, int sample_rate,
                                   double f_min, double f_max);

// Mel band center frequencies in Hz (the triangle peaks).
std::vector<double> mel_center_frequencies(int n_mels, double f_min, double f_max);

int frontend_frame_count(std::size_t input_len, const FrontendConfig& cfg);

MelSpectrogram forward_frontend(const Waveform& w, const FrontendConfig& cfg,
                                FrontendTape* tape = nullptr);

// Gradient of <grad_out, forward_frontend(w)> with respect to w.
// grad_out must match the tape's [n_mels x n_frames] shape.
std::vector<double> backward_frontend(const FrontendTape& tape,
                                      const MelSpectrogram& grad_out);

// Cyclic repeat padding to exactly target_frames frames; ceil(d/2) frames go
// before the original block, floor(d/2) after. Specs already long enough are
// returned unchanged.
MelSpectrogram pad_repeat(const MelSpectrogram& spec, int target_frames);

// Maps output frame index to the source frame index pad_repeat copied from.
int pad_repeat_source_index(int out_frame, int n_frames, int target_frames);

// Scatter-adds a gradient on the padded spec back onto the original frames.
MelSpectrogram backward_pad_repeat(const MelSpectrogram& grad_padded, int n_frames);

// Half-overlapping windows of window_len frames (offsets 0, len/2, ...); the
// last window is right-aligned so the tail is covered. Shorter specs yield a
// single pad_repeat'ed window.
std::vector<int> window_offsets(int n_frames, int window_len);
std::vector<MelSpectrogram> extract_windows(const MelSpectrogram& spec, int window_len = 116);

// Copies frames [offset, offset+len) out of a spec.
MelSpectrogram slice_frames(const MelSpectrogram& spec, int offset, int len);

// Per-band mean and std of dB mel values pooled over all frames of all
// clips (normalization stats are NOT applied while fitting). std is floored
// at 1e-8.
void fit_normalization(const std::vector<Waveform>& train_waveforms, FrontendConfig& cfg);

std::string frontend_to_json(const FrontendConfig& cfg);
FrontendConfig frontend_from_json(const std::string& text);

}  // namespace advaudio::dsp
