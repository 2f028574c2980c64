#include "advaudio/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "advaudio/fft.hpp"

namespace advaudio::dsp {

namespace {

constexpr double kDbScale = 10.0 / std::numbers::ln10;  // d(10*log10 x)/dx = kDbScale / x

// Slaney mel scale: linear below 1 kHz, logarithmic above.
constexpr double kMelFsp = 200.0 / 3.0;
constexpr double kMelMinLogHz = 1000.0;
constexpr double kMelMinLogMel = kMelMinLogHz / kMelFsp;
const double kMelLogStep = std::log(6.4) / 27.0;

double hz_to_mel(double hz) {
    if (hz < kMelMinLogHz) return hz / kMelFsp;
    return kMelMinLogMel + std::log(hz / kMelMinLogHz) / kMelLogStep;
}

double mel_to_hz(double mel) {
    if (mel < kMelMinLogMel) return mel * kMelFsp;
    return kMelMinLogHz * std::exp(kMelLogStep * (mel - kMelMinLogMel));
}

// Reflect index into [0, len) without repeating the edge sample.
std::size_t reflect_index(std::int64_t i, std::int64_t len) {
    if (len == 1) return 0;
    const std::int64_t period = 2 * (len - 1);
    std::int64_t m = i % period;
    if (m < 0) m += period;
    if (m >= len) m = period - m;
    return static_cast<std::size_t>(m);
}

std::vector<double> hann_window(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    return w;
}

}  // namespace

void FrontendConfig::validate(int sample_rate) const {
    if (fft_size <= 0 || !is_pow2(static_cast<std::size_t>(fft_size)))
        throw std::invalid_argument("frontend: fft_size must be a positive power of two");
    if (hop <= 0 || hop > fft_size)
        throw std::invalid_argument("frontend: need 0 < hop <= fft_size");
    if (n_mels <= 0) throw std::invalid_argument("frontend: n_mels must be positive");
    if (!(f_min < f_max) || f_max > sample_rate / 2.0)
        throw std::invalid_argument("frontend: need f_min < f_max <= sample_rate/2");
    if (db_floor <= 0.0) throw std::invalid_argument("frontend: db_floor must be positive");
    if (!norm_mean.empty() && static_cast<int>(norm_mean.size()) != n_mels)
        throw std::invalid_argument("frontend: norm_mean size mismatch");
    if (!norm_std.empty()) {
        if (static_cast<int>(norm_std.size()) != n_mels)
            throw std::invalid_argument("frontend: norm_std size mismatch");
        for (double s : norm_std)
            if (!(s > 0.0)) throw std::invalid_argument("frontend: norm_std must be positive");
    }
}

std::vector<double> mel_center_frequencies(int n_mels, double f_min, double f_max) {
    const double mel_lo = hz_to_mel(f_min);
    const double mel_hi = hz_to_mel(f_max);
    std::vector<double> centers(n_mels);
    for (int m = 0; m < n_mels; ++m) {
        const double mel = mel_lo + (mel_hi - mel_lo) * (m + 1) / (n_mels + 1);
        centers[m] = mel_to_hz(mel);
    }
    return centers;
}

std::vector<double> mel_filterbank(int n_mels, int fft_size, int sample_rate,
                                   double f_min, double f_max) {
    const int n_bins = fft_size / 2 + 1;
    const double mel_lo = hz_to_mel(f_min);
    const double mel_hi = hz_to_mel(f_max);
    std::vector<double> corners(n_mels + 2);
    for (int m = 0; m < n_mels + 2; ++m)
        corners[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1));

    std::vector<double> bank(static_cast<std::size_t>(n_mels) * n_bins, 0.0);
    for (int m = 0; m < n_mels; ++m) {
        const double left = corners[m], center = corners[m + 1], right = corners[m + 2];
        for (int k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / fft_size;
            double wl = (center - left) > 0 ? (f - left) / (center - left) : 0.0;
            double wr = (right - center) > 0 ? (right - f) / (right - center) : 0.0;
            bank[static_cast<std::size_t>(m) * n_bins + k] = std::max(0.0, std::min(wl, wr));
        }
    }
    return bank;
}

int frontend_frame_count(std::size_t input_len, const FrontendConfig& cfg) {
    // pad_total = fft_size, so 1 + floor(len / hop).
    return 1 + static_cast<int>(input_len / static_cast<std::size_t>(cfg.hop));
}

MelSpectrogram forward_frontend(const Waveform& w, const FrontendConfig& cfg,
                                FrontendTape* tape) {
    if (w.samples.empty()) throw std::invalid_argument("forward_frontend: empty waveform");
    cfg.validate(w.sample_rate);

    const int fft = cfg.fft_size;
    const int pad = fft / 2;
    const int n_bins = fft / 2 + 1;
    const std::int64_t len = static_cast<std::int64_t>(w.samples.size());
    const int n_frames = frontend_frame_count(w.samples.size(), cfg);

    const std::vector<double> window = hann_window(fft);
    const std::vector<double> bank =
        mel_filterbank(cfg.n_mels, fft, w.sample_rate, cfg.f_min, cfg.f_max);

    std::vector<std::complex<double>> spectra(static_cast<std::size_t>(n_frames) * n_bins);
    std::vector<double> power(static_cast<std::size_t>(n_bins));
    std::vector<double> mel_power(static_cast<std::size_t>(cfg.n_mels) * n_frames);
    std::vector<std::complex<double>> frame(static_cast<std::size_t>(fft));

    for (int t = 0; t < n_frames; ++t) {
        const std::int64_t start = static_cast<std::int64_t>(t) * cfg.hop - pad;
        for (int i = 0; i < fft; ++i) {
            const double s = w.samples[reflect_index(start + i, len)];
            frame[i] = {s * window[i], 0.0};
        }
        fft_pow2(frame.data(), fft, false);
        for (int k = 0; k < n_bins; ++k) {
            spectra[static_cast<std::size_t>(t) * n_bins + k] = frame[k];
            power[k] = std::norm(frame[k]);
        }
        for (int m = 0; m < cfg.n_mels; ++m) {
            const double* row = &bank[static_cast<std::size_t>(m) * n_bins];
            double acc = 0.0;
            for (int k = 0; k < n_bins; ++k) acc += row[k] * power[k];
            mel_power[static_cast<std::size_t>(m) * n_frames + t] = acc;
        }
    }

    MelSpectrogram out;
    out.n_mels = cfg.n_mels;
    out.n_frames = n_frames;
    out.values.resize(mel_power.size());
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double mean = cfg.norm_mean.empty() ? 0.0 : cfg.norm_mean[m];
        const double std_ = cfg.norm_std.empty() ? 1.0 : cfg.norm_std[m];
        for (int t = 0; t < n_frames; ++t) {
            const std::size_t i = static_cast<std::size_t>(m) * n_frames + t;
            const double db = 10.0 * std::log10(std::max(mel_power[i], cfg.db_floor));
            out.values[i] = (db - mean) / std_;
        }
    }

    if (tape) {
        tape->cfg = cfg;
        tape->sample_rate = w.sample_rate;
        tape->input_len = w.samples.size();
        tape->n_frames = n_frames;
        tape->spectra = std::move(spectra);
        tape->mel_power = std::move(mel_power);
    }
    return out;
}

std::vector<double> backward_frontend(const FrontendTape& tape, const MelSpectrogram& grad_out) {
    const FrontendConfig& cfg = tape.cfg;
    if (grad_out.n_mels != cfg.n_mels || grad_out.n_frames != tape.n_frames)
        throw std::invalid_argument("backward_frontend: grad_out shape mismatch");

    const int fft = cfg.fft_size;
    const int pad = fft / 2;
    const int n_bins = fft / 2 + 1;
    const int n_frames = tape.n_frames;
    const std::int64_t len = static_cast<std::int64_t>(tape.input_len);

    const std::vector<double> window = hann_window(fft);
    const std::vector<double> bank =
        mel_filterbank(cfg.n_mels, fft, tape.sample_rate, cfg.f_min, cfg.f_max);

    std::vector<double> grad(static_cast<std::size_t>(tape.input_len), 0.0);
    std::vector<double> g_mel(static_cast<std::size_t>(cfg.n_mels));
    std::vector<double> g_power(static_cast<std::size_t>(n_bins));
    std::vector<std::complex<double>> acc(static_cast<std::size_t>(fft));

    for (int t = 0; t < n_frames; ++t) {
        // normalization (affine) then the dB clamp: d(dB)/d(mel) = kDbScale/mel
        // above the floor, 0 where the clamp is active.
        for (int m = 0; m < cfg.n_mels; ++m) {
            const double std_ = cfg.norm_std.empty() ? 1.0 : cfg.norm_std[m];
            const double mp = tape.mel_power[static_cast<std::size_t>(m) * n_frames + t];
            const double g_db = grad_out.at(m, t) / std_;
            g_mel[m] = (mp > cfg.db_floor) ? g_db * kDbScale / mp : 0.0;
        }
        // mel filterbank transpose
        for (int k = 0; k < n_bins; ++k) g_power[k] = 0.0;
        for (int m = 0; m < cfg.n_mels; ++m) {
            if (g_mel[m] == 0.0) continue;
            const double* row = &bank[static_cast<std::size_t>(m) * n_bins];
            for (int k = 0; k < n_bins; ++k) g_power[k] += row[k] * g_mel[m];
        }
        // power = Re^2 + Im^2, then the adjoint DFT. Packing the per-bin
        // cotangent as a complex vector C and evaluating Re(sum C_k e^{ikn})
        // via an unnormalized inverse FFT gives the frame gradient in one
        // transform. Bins k and fft-k both alias onto the stored half
        // spectrum of a real frame, so interior bins count twice.
        std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
        for (int k = 0; k < n_bins; ++k) {
            const std::complex<double> x = tape.spectra[static_cast<std::size_t>(t) * n_bins + k];
            const double scale = (k == 0 || k == fft / 2) ? 1.0 : 2.0;
            acc[k] = {scale * 2.0 * g_power[k] * x.real(), scale * 2.0 * g_power[k] * x.imag()};
        }
        fft_pow2(acc.data(), fft, true);

        const std::int64_t start = static_cast<std::int64_t>(t) * cfg.hop - pad;
        for (int i = 0; i < fft; ++i) {
            grad[reflect_index(start + i, len)] += acc[i].real() * window[i];
        }
    }
    return grad;
}

int pad_repeat_source_index(int out_frame, int n_frames, int target_frames) {
    if (n_frames >= target_frames) return out_frame;
    const int d = target_frames - n_frames;
    const int before = (d + 1) / 2;
    int m = (out_frame - before) % n_frames;
    if (m < 0) m += n_frames;
    return m;
}

MelSpectrogram pad_repeat(const MelSpectrogram& spec, int target_frames) {
    if (target_frames < 1) throw std::invalid_argument("pad_repeat: target_frames must be >= 1");
    if (spec.n_frames >= target_frames) return spec;
    MelSpectrogram out;
    out.n_mels = spec.n_mels;
    out.n_frames = target_frames;
    out.values.resize(static_cast<std::size_t>(spec.n_mels) * target_frames);
    for (int j = 0; j < target_frames; ++j) {
        const int src = pad_repeat_source_index(j, spec.n_frames, target_frames);
        for (int m = 0; m < spec.n_mels; ++m) out.at(m, j) = spec.at(m, src);
    }
    return out;
}

MelSpectrogram backward_pad_repeat(const MelSpectrogram& grad_padded, int n_frames) {
    if (grad_padded.n_frames < n_frames)
        throw std::invalid_argument("backward_pad_repeat: padded grad shorter than source");
    MelSpectrogram grad;
    grad.n_mels = grad_padded.n_mels;
    grad.n_frames = n_frames;
    grad.values.assign(static_cast<std::size_t>(grad.n_mels) * n_frames, 0.0);
    for (int j = 0; j < grad_padded.n_frames; ++j) {
        const int src = pad_repeat_source_index(j, n_frames, grad_padded.n_frames);
        for (int m = 0; m < grad.n_mels; ++m) grad.at(m, src) += grad_padded.at(m, j);
    }
    return grad;
}

std::vector<int> window_offsets(int n_frames, int window_len) {
    std::vector<int> offsets;
    const int stride = std::max(1, window_len / 2);
    for (int o = 0; o + window_len <= n_frames; o += stride) offsets.push_back(o);
    if (offsets.empty() || offsets.back() + window_len < n_frames)
        offsets.push_back(n_frames - window_len);
    return offsets;
}

MelSpectrogram slice_frames(const MelSpectrogram& spec, int offset, int len) {
    if (offset < 0 || offset + len > spec.n_frames)
        throw std::out_of_range("slice_frames: window out of range");
    MelSpectrogram out;
    out.n_mels = spec.n_mels;
    out.n_frames = len;
    out.values.resize(static_cast<std::size_t>(spec.n_mels) * len);
    for (int m = 0; m < spec.n_mels; ++m)
        for (int t = 0; t < len; ++t) out.at(m, t) = spec.at(m, offset + t);
    return out;
}

std::vector<MelSpectrogram> extract_windows(const MelSpectrogram& spec, int window_len) {
    if (window_len < 1) throw std::invalid_argument("extract_windows: window_len must be >= 1");
    if (spec.n_frames < window_len) return {pad_repeat(spec, window_len)};
    std::vector<MelSpectrogram> windows;
    for (int o : window_offsets(spec.n_frames, window_len))
        windows.push_back(slice_frames(spec, o, window_len));
    return windows;
}

void fit_normalization(const std::vector<Waveform>& train_waveforms, FrontendConfig& cfg) {
    if (train_waveforms.empty())
        throw std::invalid_argument("fit_normalization: empty training set");
    FrontendConfig raw = cfg;
    raw.norm_mean.clear();
    raw.norm_std.clear();

    std::vector<double> sum(cfg.n_mels, 0.0), sumsq(cfg.n_mels, 0.0);
    std::size_t count = 0;
    for (const Waveform& w : train_waveforms) {
        const MelSpectrogram spec = forward_frontend(w, raw);
        for (int m = 0; m < spec.n_mels; ++m) {
            for (int t = 0; t < spec.n_frames; ++t) {
                const double v = spec.at(m, t);
                sum[m] += v;
                sumsq[m] += v * v;
            }
        }
        count += static_cast<std::size_t>(spec.n_frames);
    }
    cfg.norm_mean.resize(cfg.n_mels);
    cfg.norm_std.resize(cfg.n_mels);
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double mean = sum[m] / count;
        const double var = std::max(0.0, sumsq[m] / count - mean * mean);
        cfg.norm_mean[m] = mean;
        cfg.norm_std[m] = std::max(std::sqrt(var), 1e-8);
    }
}

std::string frontend_to_json(const FrontendConfig& cfg) {
    nlohmann::json j;
    j["fft_size"] = cfg.fft_size;
    j["hop"] = cfg.hop;
    j["n_mels"] = cfg.n_mels;
    j["f_min"] = cfg.f_min;
    j["f_max"] = cfg.f_max;
    j["db_floor"] = cfg.db_floor;
    j["norm_mean"] = cfg.norm_mean;
    j["norm_std"] = cfg.norm_std;
    return j.dump();
}

FrontendConfig frontend_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    FrontendConfig cfg;
    cfg.fft_size = j.at("fft_size").get<int>();
    cfg.hop = j.at("hop").get<int>();
    cfg.n_mels = j.at("n_mels").get<int>();
    cfg.f_min = j.at("f_min").get<double>();
    cfg.f_max = j.at("f_max").get<double>();
    cfg.db_floor = j.at("db_floor").get<double>();
    cfg.norm_mean = j.value("norm_mean", std::vector<double>{});
    cfg.norm_std = j.value("norm_std", std::vector<double>{});
    return cfg;
}

}  // namespace advaudio::dsp
