#include "advaudio/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "advaudio/rng.hpp"

namespace advaudio {

namespace {

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<char*>(b), 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    out.write(reinterpret_cast<char*>(b), 2);
}

double decode_sample(const unsigned char* p, int bits, int format) {
    if (format == 3) {  // IEEE float
        if (bits == 32) {
            float f;
            std::memcpy(&f, p, 4);
            return static_cast<double>(f);
        }
        double d;
        std::memcpy(&d, p, 8);
        return d;
    }
    switch (bits) {
        case 8:  // unsigned
            return (static_cast<int>(*p) - 128) / 128.0;
        case 16: {
            std::int16_t v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
            return v / 32768.0;
        }
        case 24: {
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) v |= ~0xffffff;
            return v / 8388608.0;
        }
        case 32: {
            std::int32_t v;
            std::memcpy(&v, p, 4);
            return v / 2147483648.0;
        }
        default:
            throw std::runtime_error("load_wav: unsupported bit depth");
    }
}

constexpr int kSincTaps = 64;
constexpr double kKaiserBeta = 8.0;

double bessel_i0(double x) {
    // Power series; converges quickly for the argument range we use.
    double sum = 1.0, term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

}  // namespace

int label_index(const std::string& label) {
    for (int i = 0; i < kNumClasses; ++i) {
        if (label == kLabels[i]) return i;
    }
    return -1;
}

Waveform load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_wav: cannot open " + path);

    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0)
        throw std::runtime_error("load_wav: not a RIFF file: " + path);
    read_u32(in);  // riff size
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0)
        throw std::runtime_error("load_wav: not a WAVE file: " + path);

    int channels = 0, sample_rate = 0, bits = 0, format = 0;
    std::vector<unsigned char> data;
    while (in.read(tag, 4)) {
        std::uint32_t size = read_u32(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = read_u16(in);
            channels = read_u16(in);
            sample_rate = static_cast<int>(read_u32(in));
            read_u32(in);  // byte rate
            read_u16(in);  // block align
            bits = read_u16(in);
            if (format == 0xFFFE && size >= 40) {  // WAVE_FORMAT_EXTENSIBLE
                read_u16(in);                      // cbSize
                read_u16(in);                      // valid bits
                read_u32(in);                      // channel mask
                format = read_u16(in);             // first two bytes of the sub-format GUID
                in.seekg(14, std::ios::cur);
            } else if (size > 16) {
                in.seekg(size - 16, std::ios::cur);
            }
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(size);
            in.read(reinterpret_cast<char*>(data.data()), size);
            if (!in) throw std::runtime_error("load_wav: truncated data chunk: " + path);
            break;
        } else {
            in.seekg(size + (size & 1), std::ios::cur);
        }
    }
    if (channels <= 0 || sample_rate <= 0)
        throw std::runtime_error("load_wav: missing fmt chunk: " + path);
    if (format != 1 && format != 3)
        throw std::runtime_error("load_wav: non-PCM encoding: " + path);

    const int bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = static_cast<std::size_t>(bytes_per_sample) * channels;
    if (frame_bytes == 0 || data.size() < frame_bytes)
        throw std::runtime_error("load_wav: zero-length audio: " + path);
    const std::size_t n_frames = data.size() / frame_bytes;

    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        const unsigned char* frame = data.data() + i * frame_bytes;
        for (int c = 0; c < channels; ++c) {
            acc += decode_sample(frame + c * bytes_per_sample, bits, format);
        }
        w.samples[i] = acc / channels;
    }
    return w;
}

void save_wav(const Waveform& w, const std::string& path) {
    for (double s : w.samples) {
        if (!std::isfinite(s)) throw std::runtime_error("save_wav: non-finite sample");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_wav: cannot open " + path + " for writing");

    const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
    const std::uint32_t data_bytes = n * 2;
    out.write("RIFF", 4);
    write_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1);  // PCM
    write_u16(out, 1);  // mono
    write_u32(out, static_cast<std::uint32_t>(w.sample_rate));
    write_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
    write_u16(out, 2);
    write_u16(out, 16);
    out.write("data", 4);
    write_u32(out, data_bytes);
    for (double s : w.samples) {
        double clipped = std::clamp(s, -1.0, 1.0);
        long q = std::lround(clipped * 32768.0);
        q = std::clamp(q, -32768L, 32767L);
        write_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    if (!out) throw std::runtime_error("save_wav: write failed: " + path);
}

Waveform resample(const Waveform& w, int target_rate) {
    if (target_rate <= 0) throw std::invalid_argument("resample: target_rate must be positive");
    if (w.sample_rate == target_rate) return w;

    const std::int64_t in_rate = w.sample_rate;
    const std::int64_t out_rate = target_rate;
    const std::int64_t g = std::gcd(in_rate, out_rate);
    const std::int64_t up = out_rate / g;    // output samples per...
    const std::int64_t down = in_rate / g;   // ...this many input samples

    const std::int64_t in_len = static_cast<std::int64_t>(w.samples.size());
    const std::int64_t out_len = (in_len * out_rate + in_rate / 2) / in_rate;

    // One table of 64 taps per output phase. Cutoff at the smaller Nyquist;
    // each phase is normalized to unit DC gain.
    const double cutoff = 0.5 * std::min(1.0, static_cast<double>(out_rate) / in_rate);
    const int half = kSincTaps / 2;
    const double i0_beta = bessel_i0(kKaiserBeta);
    std::vector<double> taps(static_cast<std::size_t>(up) * kSincTaps);
    for (std::int64_t phase = 0; phase < up; ++phase) {
        const double frac = static_cast<double>(phase) / up;
        double sum = 0.0;
        for (int j = 0; j < kSincTaps; ++j) {
            const double t = (j - half + 1) - frac;  // tap position relative to the sample point
            const double x = 2.0 * cutoff * t;
            double sinc = (std::abs(x) < 1e-12)
                              ? 1.0
                              : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
            const double u = t / half;
            double window = 0.0;
            if (std::abs(u) <= 1.0)
                window = bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta;
            const double h = 2.0 * cutoff * sinc * window;
            taps[phase * kSincTaps + j] = h;
            sum += h;
        }
        if (sum != 0.0) {
            for (int j = 0; j < kSincTaps; ++j) taps[phase * kSincTaps + j] /= sum;
        }
    }

    Waveform out;
    out.sample_rate = target_rate;
    out.samples.resize(static_cast<std::size_t>(std::max<std::int64_t>(out_len, 1)));
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(out.samples.size()); ++n) {
        // Input position of output sample n is n*down/up.
        const std::int64_t num = n * down;
        const std::int64_t ipos = num / up;
        const std::int64_t phase = num % up;
        const double* h = &taps[phase * kSincTaps];
        double acc = 0.0;
        for (int j = 0; j < kSincTaps; ++j) {
            const std::int64_t k = ipos + (j - half + 1);
            if (k >= 0 && k < in_len) acc += w.samples[static_cast<std::size_t>(k)] * h[j];
        }
        out.samples[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

Split split_dataset(const DatasetManifest& m, std::size_t train_count, std::uint64_t seed) {
    const std::size_t n = m.entries.size();
    if (train_count == 0 || train_count >= n)
        throw std::invalid_argument("split_dataset: train_count out of range");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    Split s;
    s.seed = seed;
    s.train.assign(idx.begin(), idx.begin() + train_count);
    s.validation.assign(idx.begin() + train_count, idx.end());
    return s;
}

DatasetManifest load_manifest(const std::string& path, std::size_t* total_rows) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
    DatasetManifest m;
    std::string line;
    bool header = true;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        ++rows;
        // fname up to the first comma; label is the rest, possibly quoted.
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) continue;
        std::string fname = line.substr(0, comma);
        std::string label = line.substr(comma + 1);
        if (label.size() >= 2 && label.front() == '"' && label.back() == '"')
            label = label.substr(1, label.size() - 2);
        const int cls = label_index(label);
        if (cls < 0) continue;  // multi-label or out-of-set rows are dropped
        m.entries.push_back({fname, cls});
    }
    if (total_rows) *total_rows = rows;
    return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_manifest: cannot open " + path);
    out << "fname,label\n";
    for (const auto& e : m.entries) out << e.fname << ',' << kLabels[e.label] << '\n';
}

void save_split(const Split& s, const std::string& path) {
    nlohmann::json j;
    j["train"] = s.train;
    j["validation"] = s.validation;
    j["seed"] = s.seed;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_split: cannot open " + path);
    out << j.dump(2) << '\n';
}

Split load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_split: cannot open " + path);
    nlohmann::json j;
    in >> j;
    Split s;
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.validation = j.at("validation").get<std::vector<std::size_t>>();
    s.seed = j.value("seed", 0ULL);
    return s;
}

}  // namespace advaudio
