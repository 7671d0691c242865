#include "dsu/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "dsu/image_io.hpp"

namespace dsu {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_floats(std::string& out, const std::vector<float>& v) {
    const std::size_t off = out.size();
    out.resize(off + v.size() * 4);
    std::memcpy(out.data() + off, v.data(), v.size() * 4);
}

void put_entry(std::string& out, const std::string& name, const std::vector<int>& dims,
               const std::vector<float>& vals) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (const int d : dims) put_u32(out, static_cast<std::uint32_t>(d));
    put_floats(out, vals);
}

struct Reader {
    const std::string& b;
    std::size_t pos = 0;
    const std::string& path;

    bool eof() const { return pos >= b.size(); }
    std::uint32_t u32() {
        if (pos + 4 > b.size()) throw DataError("checkpoint truncated: " + path);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::string str(std::size_t n) {
        if (pos + n > b.size()) throw DataError("checkpoint truncated: " + path);
        std::string s = b.substr(pos, n);
        pos += n;
        return s;
    }
    std::vector<float> floats(std::size_t n) {
        if (pos + n * 4 > b.size()) throw DataError("checkpoint truncated: " + path);
        std::vector<float> v(n);
        std::memcpy(v.data(), b.data() + pos, n * 4);
        pos += n * 4;
        return v;
    }
};

} // namespace

void save_checkpoint(const std::string& path, const ParamSet& params,
                     long sal_steps, long depth_steps) {
    std::string out = "DSU1";
    for (const auto& p : params.all()) {
        put_entry(out, p->name, p->dims, p->v);
        if (p->trainable) {
            put_entry(out, p->name + "#m", p->dims, p->m);
            put_entry(out, p->name + "#v", p->dims, p->v2);
        }
    }
    put_entry(out, "opt.sal.t", {1}, {static_cast<float>(sal_steps)});
    put_entry(out, "opt.depth.t", {1}, {static_cast<float>(depth_steps)});
    atomic_write_file(path, out);
}

CheckpointMeta load_checkpoint(const std::string& path, ParamSet& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 4 || bytes.compare(0, 4, "DSU1") != 0)
        throw DataError("not a DSU1 checkpoint: " + path);

    Reader r{bytes, 4, path};
    std::map<std::string, std::vector<float>> extra;
    CheckpointMeta meta;
    while (!r.eof()) {
        const std::string name = r.str(r.u32());
        const std::uint32_t nd = r.u32();
        std::size_t count = 1;
        std::vector<int> dims(nd);
        for (std::uint32_t i = 0; i < nd; ++i) {
            dims[i] = static_cast<int>(r.u32());
            count *= static_cast<std::size_t>(dims[i]);
        }
        std::vector<float> vals = r.floats(count);

        const std::size_t hash_pos = name.rfind('#');
        const std::string base = hash_pos == std::string::npos ? name : name.substr(0, hash_pos);
        Param* p = params.find(base);
        if (p != nullptr) {
            if (p->size() != count)
                throw DataError("checkpoint entry " + name + " has wrong size in " + path);
            if (hash_pos == std::string::npos) p->v = std::move(vals);
            else if (name.compare(hash_pos, 2, "#m") == 0) p->m = std::move(vals);
            else p->v2 = std::move(vals);
        } else if (name == "opt.sal.t") {
            meta.sal_steps = static_cast<long>(vals.at(0));
        } else if (name == "opt.depth.t") {
            meta.depth_steps = static_cast<long>(vals.at(0));
        } else {
            throw DataError("checkpoint entry " + name + " does not match the model in " + path);
        }
    }
    return meta;
}

} // namespace dsu
