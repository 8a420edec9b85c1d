#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kmap/dynamics.hpp"

namespace kmap {

// Generator configuration. The defaults put the composed map deep in its
// chaotic regime at 512-bit arithmetic; the zoom depth k is the quality
// knob (larger k discards more leading digits of every orbit point).
struct PrngConfig {
    MapId map = MapId::Fog;
    Params params{3.99999999, 1.99999999};
    std::string seed = "0.1";  // decimal in (0, 1)
    unsigned k = 0;            // zoom depth, at most 11
    unsigned d = 1;            // decimal symbol width, in [1, 9]
    std::uint64_t burnin = 400;
    PrecisionMode precision = PrecisionMode::extended();

    void validate() const;
    std::string describe() const; // one-line key=value summary
};

static constexpr unsigned kMaxPrngZoom = 11;

// Deterministic value stream: one underlying orbit, burn-in applied at
// construction, every emission one map step. The three views (unit
// value, decimal symbol, 32-bit word) of a given position are all
// derived from the same zoomed orbit point.
class RandomStream {
public:
    explicit RandomStream(const PrngConfig& cfg);

    PhaseValue next_value();     // phi_k(x) at full precision
    std::uint32_t next_digit();  // floor(phi_k(x) * 10^d)
    std::uint32_t next_word32(); // first 32 binary fraction digits of phi_k(x)

    struct Sample {
        double value;
        std::uint32_t digit;
        std::uint32_t word;
    };
    Sample next_sample(); // all views of one position, one map step

    std::uint64_t position() const { return pos_; }
    const PrngConfig& config() const { return cfg_; }

private:
    PrngConfig cfg_;
    OrbitWalker walker_;
    std::uint64_t pos_ = 0;
};

enum class StreamFormat { RawLe32, AsciiDigits, CsvReal };
StreamFormat format_from_string(const std::string& id);
std::string to_string(StreamFormat f);
std::string format_extension(StreamFormat f); // ".bin", ".txt", ".csv"

// Emits `count` symbols and returns the bytes written.
//   raw-le32:     next_word32 as 4 little-endian bytes each
//   ascii-digits: next_digit zero-padded to d characters, a newline
//                 after every 80th character, and a final newline
//   csv-real:     next_value as decimal text, one per line
std::uint64_t write_stream(const PrngConfig& cfg, std::uint64_t count, StreamFormat f,
                           std::ostream& os);
std::uint64_t write_stream_file(const PrngConfig& cfg, std::uint64_t count, StreamFormat f,
                                const std::string& path);

struct ManifestFile {
    std::string path; // relative to the manifest's directory
    std::string seed;
    std::uint64_t bytes = 0; // 0 until the file has been written
};

// Everything needed to regenerate a batch byte for byte: the shared
// generator settings, the output format, the symbol count per file, and
// one seed per file.
struct Manifest {
    PrngConfig base; // base.seed is ignored; seeds live per file
    StreamFormat format = StreamFormat::RawLe32;
    std::uint64_t count = 0; // symbols per file
    std::optional<std::uint64_t> source_seed;
    std::vector<ManifestFile> files;
};

void write_manifest(std::ostream& os, const Manifest& m);
Manifest parse_manifest(std::istream& is);
void save_manifest(const std::string& path, const Manifest& m);
Manifest load_manifest(const std::string& path);

struct CorpusSpec {
    PrngConfig base;
    std::uint64_t files = 100;
    std::uint64_t count = 2'800'000; // symbols per file
    StreamFormat format = StreamFormat::RawLe32;
    std::string dir = ".";
    std::string prefix = "stream";
    std::uint64_t source_seed = 1;
    unsigned workers = 1;
};

// Writes `files` streams with per-file seeds drawn from source_seed and
// returns the manifest describing them. Seeds are drawn up front in
// file order, so the worker count cannot change any output byte.
Manifest generate_corpus(const CorpusSpec& spec);

// Rewrites every file listed in the manifest under `dir`. Throws IoError
// if a regenerated file's size disagrees with the recorded byte count.
std::uint64_t regenerate_from_manifest(const Manifest& m, const std::string& dir,
                                       unsigned workers);

} // namespace kmap
