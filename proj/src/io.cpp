#include "gsn/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gsn {

namespace {

constexpr unsigned char kMagic[4] = {0x41, 0x54, 0x4E, 0x4D};  // "ATNM"

void put_u32(std::vector<unsigned char>& out, uint32_t x) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((x >> (8 * i)) & 0xFF));
}

uint32_t get_u32(const std::vector<unsigned char>& in, size_t at) {
    uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(in[at + i]) << (8 * i);
    return x;
}

void put_f64(std::vector<unsigned char>& out, double x) {
    uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
}

double get_f64(const std::vector<unsigned char>& in, size_t at) {
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(in[at + i]) << (8 * i);
    double x;
    std::memcpy(&x, &bits, sizeof x);
    return x;
}

}  // namespace

std::vector<unsigned char> encode_atnm(const AttentionStack& stack) {
    if (stack.h < 1 || stack.w < 1 || stack.n < 1) throw ValidationError("encode_atnm: empty stack");
    std::vector<unsigned char> out;
    out.reserve(20 + stack.v.size() * 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, 1);
    put_u32(out, static_cast<uint32_t>(stack.h));
    put_u32(out, static_cast<uint32_t>(stack.w));
    put_u32(out, static_cast<uint32_t>(stack.n));
    for (double x : stack.v) put_f64(out, x);  // storage order is already (i, j, n)
    return out;
}

AttentionStack decode_atnm(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IoError("decode_atnm: bad magic or truncated header");
    const uint32_t version = get_u32(bytes, 4);
    if (version != 1) throw IoError("decode_atnm: unsupported version " + std::to_string(version));
    const uint32_t h = get_u32(bytes, 8), w = get_u32(bytes, 12), n = get_u32(bytes, 16);
    if (h < 1 || w < 1 || n < 1) throw IoError("decode_atnm: degenerate dims");
    const size_t count = static_cast<size_t>(h) * w * n;
    if (bytes.size() != 20 + count * 8) throw IoError("decode_atnm: payload size mismatch");
    AttentionStack stack(static_cast<int>(h), static_cast<int>(w), static_cast<int>(n));
    for (size_t k = 0; k < count; ++k) stack.v[k] = get_f64(bytes, 20 + k * 8);
    return stack;
}

void write_atnm(const std::string& path, const AttentionStack& stack) {
    const auto bytes = encode_atnm(stack);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("write_atnm: cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write_atnm: short write to " + path);
}

AttentionStack read_atnm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("read_atnm: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_atnm(bytes);
}

std::string format_double(double x) {
    // %.17g always round-trips; prefer the shortest representation that does.
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return buf;
}

std::string metrics_csv(const std::vector<MetricRecord>& rows) {
    std::string out = "step,intensity,variance,iou,com_distance,sym_kl,cc\n";
    for (size_t k = 0; k < rows.size(); ++k) {
        const MetricRecord& r = rows[k];
        out += std::to_string(k);
        for (double x : {r.intensity, r.variance, r.iou, r.com_distance, r.sym_kl, r.cc})
            out += "," + format_double(x);
        out += "\n";
    }
    return out;
}

std::vector<MetricRecord> parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "step,intensity,variance,iou,com_distance,sym_kl,cc")
        throw IoError("metrics csv: bad header");
    std::vector<MetricRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MetricRecord r;
        long step = 0;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%lf,%lf,%lf", &step, &r.intensity, &r.variance, &r.iou,
                        &r.com_distance, &r.sym_kl, &r.cc) != 7)
            throw IoError("metrics csv: bad row '" + line + "'");
        if (step != static_cast<long>(rows.size())) throw IoError("metrics csv: non-contiguous step index");
        rows.push_back(r);
    }
    return rows;
}

std::string summary_json(const TrialRecord& rec) {
    nlohmann::json doc;
    doc["seed"] = rec.seed;
    doc["success"] = rec.success;
    doc["formed"] = rec.formed;
    doc["steps"] = rec.metrics.size();
    return doc.dump() + "\n";
}

void write_trial_outputs(const std::string& out_dir, const TrialRecord& rec) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(out_dir) / ("trial_" + std::to_string(rec.seed));
    fs::create_directories(dir);
    write_text_file((dir / "metrics.csv").string(), metrics_csv(rec.metrics));
    write_atnm((dir / "final.atnm").string(), rec.final_stack);
    write_text_file((dir / "summary.json").string(), summary_json(rec));
}

TrialRecord read_trial_dir(const std::string& trial_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(trial_dir);
    TrialRecord rec;
    rec.metrics = parse_metrics_csv(read_text_file((dir / "metrics.csv").string()));
    rec.final_stack = read_atnm((dir / "final.atnm").string());

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file((dir / "summary.json").string()));
        rec.seed = doc.at("seed").get<uint64_t>();
        rec.success = doc.at("success").get<bool>();
        rec.formed = doc.at("formed").get<std::vector<bool>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("summary.json in " + trial_dir + ": " + e.what());
    }
    return rec;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream out;
    out << f.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw IoError("short write to " + path);
}

}  // namespace gsn
