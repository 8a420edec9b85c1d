#include "kmap/prng.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "parallel.hpp"

namespace kmap {

namespace {

PhaseValue parse_seed(const PrngConfig& cfg) {
    cfg.validate();
    OrbitSpec probe;
    probe.map = cfg.map;
    probe.params = cfg.params;
    probe.x0 = cfg.seed;
    probe.transient = cfg.burnin;
    probe.k = cfg.k;
    probe.precision = cfg.precision;
    return probe.seed();
}

std::string real_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void PrngConfig::validate() const {
    if (k > kMaxPrngZoom) {
        throw ValidationError("generator zoom depth is capped at " +
                              std::to_string(kMaxPrngZoom) + ", got " + std::to_string(k));
    }
    if (d < 1 || d > 9) {
        throw ValidationError("symbol width d must lie in [1, 9], got " + std::to_string(d));
    }
    OrbitSpec probe;
    probe.map = map;
    probe.params = params;
    probe.x0 = seed;
    probe.transient = burnin;
    probe.k = k;
    probe.precision = precision;
    probe.validate();
}

std::string PrngConfig::describe() const {
    std::ostringstream os;
    os << "map=" << to_string(map) << " mu=" << real_text(params.mu)
       << " gamma=" << real_text(params.gamma) << " seed=" << seed << " k=" << k << " d=" << d
       << " burnin=" << burnin << " precision=" << precision.str();
    return os.str();
}

RandomStream::RandomStream(const PrngConfig& cfg)
    : cfg_(cfg), walker_(cfg.map, cfg.params, parse_seed(cfg)) {
    for (std::uint64_t i = 0; i < cfg_.burnin; ++i) walker_.advance();
}

PhaseValue RandomStream::next_value() {
    walker_.advance();
    ++pos_;
    return walker_.current(cfg_.k);
}

std::uint32_t RandomStream::next_digit() {
    walker_.advance();
    ++pos_;
    return walker_.zoomed_digit(cfg_.k, cfg_.d);
}

std::uint32_t RandomStream::next_word32() {
    walker_.advance();
    ++pos_;
    return walker_.zoomed_word32(cfg_.k);
}

RandomStream::Sample RandomStream::next_sample() {
    walker_.advance();
    ++pos_;
    Sample s;
    s.value = walker_.zoomed_double(cfg_.k);
    s.digit = walker_.zoomed_digit(cfg_.k, cfg_.d);
    s.word = walker_.zoomed_word32(cfg_.k);
    return s;
}

StreamFormat format_from_string(const std::string& id) {
    if (id == "raw-le32") return StreamFormat::RawLe32;
    if (id == "ascii-digits") return StreamFormat::AsciiDigits;
    if (id == "csv-real") return StreamFormat::CsvReal;
    throw ValidationError("unknown stream format '" + id +
                          "' (expected raw-le32, ascii-digits, or csv-real)");
}

std::string to_string(StreamFormat f) {
    switch (f) {
        case StreamFormat::RawLe32: return "raw-le32";
        case StreamFormat::AsciiDigits: return "ascii-digits";
        case StreamFormat::CsvReal: return "csv-real";
    }
    throw ValidationError("invalid stream format");
}

std::string format_extension(StreamFormat f) {
    switch (f) {
        case StreamFormat::RawLe32: return ".bin";
        case StreamFormat::AsciiDigits: return ".txt";
        case StreamFormat::CsvReal: return ".csv";
    }
    throw ValidationError("invalid stream format");
}

std::uint64_t write_stream(const PrngConfig& cfg, std::uint64_t count, StreamFormat f,
                           std::ostream& os) {
    RandomStream stream(cfg);
    std::uint64_t bytes = 0;
    std::string buf;
    buf.reserve(1 << 16);
    auto flush = [&] {
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        buf.clear();
    };

    switch (f) {
        case StreamFormat::RawLe32: {
            for (std::uint64_t i = 0; i < count; ++i) {
                const std::uint32_t w = stream.next_word32();
                buf.push_back(static_cast<char>(w & 0xff));
                buf.push_back(static_cast<char>((w >> 8) & 0xff));
                buf.push_back(static_cast<char>((w >> 16) & 0xff));
                buf.push_back(static_cast<char>((w >> 24) & 0xff));
                if (buf.size() >= (1 << 16)) flush();
            }
            bytes = 4 * count;
            break;
        }
        case StreamFormat::AsciiDigits: {
            unsigned col = 0;
            char sym[16];
            for (std::uint64_t i = 0; i < count; ++i) {
                const std::uint32_t dg = stream.next_digit();
                const int len = std::snprintf(sym, sizeof(sym), "%0*u", static_cast<int>(cfg.d), dg);
                for (int c = 0; c < len; ++c) {
                    buf.push_back(sym[c]);
                    ++bytes;
                    if (++col == 80) {
                        buf.push_back('\n');
                        ++bytes;
                        col = 0;
                    }
                }
                if (buf.size() >= (1 << 16)) flush();
            }
            if (col != 0) {
                buf.push_back('\n');
                ++bytes;
            }
            break;
        }
        case StreamFormat::CsvReal: {
            for (std::uint64_t i = 0; i < count; ++i) {
                const std::string line = to_decimal_string(stream.next_value(), 17);
                buf.append(line);
                buf.push_back('\n');
                bytes += line.size() + 1;
                if (buf.size() >= (1 << 16)) flush();
            }
            break;
        }
    }
    flush();
    os.flush();
    if (!os) throw IoError("failed writing generator stream");
    return bytes;
}

std::uint64_t write_stream_file(const PrngConfig& cfg, std::uint64_t count, StreamFormat f,
                                const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return write_stream(cfg, count, f, os);
}

void write_manifest(std::ostream& os, const Manifest& m) {
    os << "version=1\n";
    os << "map=" << to_string(m.base.map) << '\n';
    os << "mu=" << real_text(m.base.params.mu) << '\n';
    os << "gamma=" << real_text(m.base.params.gamma) << '\n';
    os << "k=" << m.base.k << '\n';
    os << "d=" << m.base.d << '\n';
    os << "burnin=" << m.base.burnin << '\n';
    os << "precision=" << m.base.precision.str() << '\n';
    os << "format=" << to_string(m.format) << '\n';
    os << "count=" << m.count << '\n';
    if (m.source_seed) os << "source_seed=" << *m.source_seed << '\n';
    for (std::size_t i = 0; i < m.files.size(); ++i) {
        os << "file." << i << ".path=" << m.files[i].path << '\n';
        os << "file." << i << ".seed=" << m.files[i].seed << '\n';
        os << "file." << i << ".bytes=" << m.files[i].bytes << '\n';
    }
    if (!os) throw IoError("failed writing manifest");
}

namespace {

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size()) {
        throw ValidationError("manifest key " + key + " has malformed integer '" + text + "'");
    }
    return v;
}

double parse_real(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw ValidationError("manifest key " + key + " has malformed real '" + text + "'");
    }
    return v;
}

} // namespace

Manifest parse_manifest(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("manifest line " + std::to_string(lineno) +
                                  " is not key=value: '" + line + "'");
        }
        const std::string key = line.substr(0, eq);
        if (!kv.emplace(key, line.substr(eq + 1)).second) {
            throw ValidationError("manifest repeats key '" + key + "'");
        }
    }

    auto take = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ValidationError("manifest is missing key '" + key + "'");
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (take("version") != "1") throw ValidationError("unsupported manifest version");
    Manifest m;
    m.base.map = map_from_string(take("map"));
    m.base.params.mu = parse_real("mu", take("mu"));
    m.base.params.gamma = parse_real("gamma", take("gamma"));
    m.base.k = static_cast<unsigned>(parse_u64("k", take("k")));
    m.base.d = static_cast<unsigned>(parse_u64("d", take("d")));
    m.base.burnin = parse_u64("burnin", take("burnin"));
    m.base.precision = PrecisionMode::parse(take("precision"));
    m.format = format_from_string(take("format"));
    m.count = parse_u64("count", take("count"));
    if (kv.count("source_seed")) m.source_seed = parse_u64("source_seed", take("source_seed"));

    std::map<std::uint64_t, ManifestFile> files;
    for (auto it = kv.begin(); it != kv.end();) {
        const std::string& key = it->first;
        if (key.rfind("file.", 0) != 0) {
            throw ValidationError("manifest has unknown key '" + key + "'");
        }
        const auto dot = key.find('.', 5);
        if (dot == std::string::npos) {
            throw ValidationError("manifest has malformed file key '" + key + "'");
        }
        const std::uint64_t idx = parse_u64(key, key.substr(5, dot - 5));
        const std::string field = key.substr(dot + 1);
        ManifestFile& f = files[idx];
        if (field == "path") {
            f.path = it->second;
        } else if (field == "seed") {
            f.seed = it->second;
        } else if (field == "bytes") {
            f.bytes = parse_u64(key, it->second);
        } else {
            throw ValidationError("manifest has unknown key '" + key + "'");
        }
        it = kv.erase(it);
    }
    if (files.empty()) throw ValidationError("manifest lists no files");
    std::uint64_t expect = 0;
    for (auto& [idx, f] : files) {
        if (idx != expect++) throw ValidationError("manifest file indices are not contiguous");
        if (f.path.empty() || f.seed.empty()) {
            throw ValidationError("manifest file " + std::to_string(idx) +
                                  " is missing path or seed");
        }
        m.files.push_back(std::move(f));
    }

    // The per-file configs must be valid as a whole.
    PrngConfig probe = m.base;
    probe.seed = m.files.front().seed;
    probe.validate();
    if (m.count < 1) throw ValidationError("manifest count must be at least 1");
    return m;
}

void save_manifest(const std::string& path, const Manifest& m) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_manifest(os, m);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest '" + path + "'");
    return parse_manifest(is);
}

Manifest generate_corpus(const CorpusSpec& spec) {
    if (spec.files < 1) throw ValidationError("corpus needs at least one file");
    if (spec.count < 1) throw ValidationError("corpus files need at least one symbol");

    // Seeds are drawn before any file is written; redraws for seeds too
    // close to the interval ends keep every orbit well inside (0, 1).
    std::mt19937_64 eng(spec.source_seed);
    std::uniform_int_distribution<std::uint64_t> dist(1, 999'999'999'999'999'999ULL);
    std::vector<std::string> seeds;
    seeds.reserve(spec.files);
    for (std::uint64_t i = 0; i < spec.files; ++i) {
        std::uint64_t v;
        do {
            v = dist(eng);
        } while (v <= 1'000'000'000'000ULL || v >= 999'999'000'000'000'000ULL);
        std::string digits = std::to_string(v);
        seeds.push_back("0." + std::string(18 - digits.size(), '0') + digits);
    }

    std::error_code ec;
    std::filesystem::create_directories(spec.dir, ec);
    if (ec) throw IoError("cannot create corpus directory '" + spec.dir + "': " + ec.message());

    int width = 3;
    for (std::uint64_t v = spec.files - 1; v >= 1000; v /= 10) ++width;

    Manifest m;
    m.base = spec.base;
    m.base.seed = seeds.front(); // placeholder; per-file seeds are authoritative
    m.format = spec.format;
    m.count = spec.count;
    m.source_seed = spec.source_seed;
    m.files.resize(spec.files);
    for (std::uint64_t i = 0; i < spec.files; ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%0*llu%s", spec.prefix.c_str(), width,
                      static_cast<unsigned long long>(i), format_extension(spec.format).c_str());
        m.files[i].path = name;
        m.files[i].seed = seeds[i];
    }

    detail::parallel_for(spec.files, spec.workers, [&](std::size_t i) {
        PrngConfig cfg = spec.base;
        cfg.seed = m.files[i].seed;
        const auto path = std::filesystem::path(spec.dir) / m.files[i].path;
        m.files[i].bytes = write_stream_file(cfg, spec.count, spec.format, path.string());
    });
    return m;
}

std::uint64_t regenerate_from_manifest(const Manifest& m, const std::string& dir,
                                       unsigned workers) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
    std::vector<std::uint64_t> bytes(m.files.size(), 0);
    detail::parallel_for(m.files.size(), workers, [&](std::size_t i) {
        PrngConfig cfg = m.base;
        cfg.seed = m.files[i].seed;
        const auto path = std::filesystem::path(dir) / m.files[i].path;
        bytes[i] = write_stream_file(cfg, m.count, m.format, path.string());
        if (m.files[i].bytes != 0 && bytes[i] != m.files[i].bytes) {
            throw IoError("regenerated '" + m.files[i].path + "' is " +
                          std::to_string(bytes[i]) + " bytes, manifest records " +
                          std::to_string(m.files[i].bytes));
        }
    });
    std::uint64_t total = 0;
    for (auto b : bytes) total += b;
    return total;
}

} // namespace kmap
