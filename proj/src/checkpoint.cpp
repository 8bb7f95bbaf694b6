#include "graphmi/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <type_traits>

#include <json.hpp>

namespace gmi {

namespace {

constexpr const char* kMagic = "GRAPHMI-CKPT-1\n";

template <typename T>
void write_le(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw Error("checkpoint: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void save_model(const GcnModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("checkpoint: cannot open " + path + " for writing");
    out.write(kMagic, static_cast<std::streamsize>(std::strlen(kMagic)));

    nlohmann::json header;
    header["seed"] = model.seed;
    header["dataset_hash"] = model.dataset_hash;
    header["layout"] = "f64le";
    header["tensors"] = nlohmann::json::array(
        {{{"name", "w0"}, {"shape", model.w0.shape}}, {{"name", "w1"}, {"shape", model.w1.shape}}});
    if (std::isfinite(model.dp_epsilon))
        header["dp_epsilon"] = model.dp_epsilon;
    else if (std::isinf(model.dp_epsilon))
        header["dp_epsilon"] = "inf";
    const std::string header_str = header.dump();
    write_le<std::uint64_t>(out, header_str.size());
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const Tensor* t : {&model.w0, &model.w1})
        for (double v : t->data) write_le<double>(out, v);
    if (!out) throw Error("checkpoint: write failed for " + path);
}

GcnModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("checkpoint: cannot open " + path);
    std::string magic(std::strlen(kMagic), '\0');
    in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
    if (!in || magic != kMagic) throw Error("checkpoint: bad magic in " + path);

    const auto header_len = read_le<std::uint64_t>(in);
    std::string header_str(header_len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw Error("checkpoint: truncated header in " + path);
    nlohmann::json header = nlohmann::json::parse(header_str, nullptr, false);
    if (header.is_discarded()) throw Error("checkpoint: invalid header JSON in " + path);

    GcnModel model;
    model.seed = header.value("seed", std::uint64_t{0});
    model.dataset_hash = header.value("dataset_hash", std::uint64_t{0});
    if (header.contains("dp_epsilon")) {
        if (header["dp_epsilon"].is_string())
            model.dp_epsilon = std::numeric_limits<double>::infinity();
        else
            model.dp_epsilon = header["dp_epsilon"].get<double>();
    }
    std::vector<Tensor*> slots{&model.w0, &model.w1};
    const auto& tensors = header.at("tensors");
    if (!tensors.is_array() || tensors.size() != slots.size())
        throw Error("checkpoint: unexpected tensor list in " + path);
    for (std::size_t t = 0; t < slots.size(); ++t) {
        const auto shape = tensors[t].at("shape").get<std::vector<std::size_t>>();
        *slots[t] = Tensor(shape);
        for (double& v : slots[t]->data) v = read_le<double>(in);
    }
    return model;
}

}  // namespace gmi
