#include "ppg/dataset_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ppg/binary_io.hpp"
#include "ppg/errors.hpp"

namespace ppg {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'P', 'P', 'G', 'D'};
constexpr std::uint16_t kBinaryVersion = 1;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Dataset read_dataset_text(std::istream& is, const std::string& path) {
    Dataset out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            std::ostringstream os;
            os << path << ": line " << line_no << ": " << e.what();
            throw ParseError(os.str());
        }
        try {
            LabeledSignal r;
            r.id = rec.at("id").get<std::string>();
            r.label = rec.at("label").get<int>();
            r.signal.sample_rate_hz = rec.at("sample_rate_hz").get<double>();
            const auto& samples = rec.at("samples");
            if (!samples.is_array()) {
                throw ParseError("samples is not an array");
            }
            r.signal.samples.resize(static_cast<Eigen::Index>(samples.size()));
            Eigen::Index i = 0;
            for (const auto& v : samples) {
                r.signal.samples[i++] = v.get<double>();
            }
            out.records.push_back(std::move(r));
        } catch (const json::exception& e) {
            std::ostringstream os;
            os << path << ": line " << line_no << ": " << e.what();
            throw ParseError(os.str());
        }
    }
    return out;
}

Dataset read_dataset_binary(std::istream& is, const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    const std::uint16_t version = read_le<std::uint16_t>(is, path + ": version");
    if (version != kBinaryVersion) {
        std::ostringstream os;
        os << path << ": unsupported binary version " << version;
        throw ParseError(os.str());
    }
    const std::uint64_t count = read_le<std::uint64_t>(is, path + ": record count");
    Dataset out;
    out.records.reserve(count);
    for (std::uint64_t rec = 0; rec < count; ++rec) {
        std::ostringstream where;
        where << "record " << rec;
        const std::string ctx = path + ": " + where.str();
        const std::uint32_t id_len = read_le<std::uint32_t>(is, ctx + " id length");
        std::string id = read_bytes(is, id_len, ctx + " id");
        const std::uint8_t label = read_le<std::uint8_t>(is, ctx + " label");
        const double rate = read_le<double>(is, ctx + " sample rate");
        const std::uint64_t len = read_le<std::uint64_t>(is, ctx + " sample count");
        LabeledSignal r;
        r.id = std::move(id);
        r.label = label;
        r.signal.sample_rate_hz = rate;
        r.signal.samples.resize(static_cast<Eigen::Index>(len));
        for (std::uint64_t i = 0; i < len; ++i) {
            r.signal.samples[static_cast<Eigen::Index>(i)] =
                static_cast<double>(read_le<float>(is, ctx + " samples"));
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

}  // namespace

void write_dataset_text(const Dataset& dataset, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("dataset: cannot open '" + path + "' for writing");
    for (const LabeledSignal& r : dataset.records) {
        json rec;
        rec["id"] = r.id;
        rec["label"] = r.label;
        rec["sample_rate_hz"] = r.signal.sample_rate_hz;
        json samples = json::array();
        for (Eigen::Index i = 0; i < r.signal.length(); ++i) {
            samples.push_back(r.signal.samples[i]);
        }
        rec["samples"] = std::move(samples);
        os << rec.dump() << '\n';
    }
    if (!os) throw ArgumentError("dataset: write to '" + path + "' failed");
}

void write_dataset_binary(const Dataset& dataset, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("dataset: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_le<std::uint16_t>(os, kBinaryVersion);
    write_le<std::uint64_t>(os, dataset.size());
    for (const LabeledSignal& r : dataset.records) {
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(r.id.size()));
        os.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
        write_le<std::uint8_t>(os, static_cast<std::uint8_t>(r.label));
        write_le<double>(os, r.signal.sample_rate_hz);
        write_le<std::uint64_t>(os, static_cast<std::uint64_t>(r.signal.length()));
        for (Eigen::Index i = 0; i < r.signal.length(); ++i) {
            write_le<float>(os, static_cast<float>(r.signal.samples[i]));
        }
    }
    if (!os) throw ArgumentError("dataset: write to '" + path + "' failed");
}

void write_dataset(const Dataset& dataset, const std::string& path) {
    if (ends_with(path, ".ppgd")) {
        write_dataset_binary(dataset, path);
    } else {
        write_dataset_text(dataset, path);
    }
}

Dataset read_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IntegrityError("dataset: cannot open '" + path + "' for reading");
    char magic[4] = {0, 0, 0, 0};
    is.read(magic, 4);
    const bool is_binary = is && std::memcmp(magic, kMagic, 4) == 0;
    is.clear();
    is.seekg(0);
    Dataset out = is_binary ? read_dataset_binary(is, path) : read_dataset_text(is, path);
    out.split = "";
    validate_dataset(out);  // duplicate ids and non-finite samples fail here
    return out;
}

}  // namespace ppg
