#include "smartpick/model_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

namespace smartpick {

namespace fs = std::filesystem;

namespace {

void write_atomic(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("short write to " + tmp.string());
    }
    int fd = ::open(tmp.c_str(), O_RDONLY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + target.string() + ": " + ec.message());
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

ModelStore::ModelStore(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create model dir " + dir_.string() + ": " + ec.message());
}

fs::path ModelStore::model_path(int version) const {
    char name[48];
    std::snprintf(name, sizeof(name), "model-%06d.json", version);
    return dir_ / name;
}

void ModelStore::publish(const PredictionModel& model) {
    if (!model.trained()) throw StateError("refusing to publish an untrained model");
    const fs::path mp = model_path(model.version());
    write_atomic(mp, model.to_json());
    write_atomic(dir_ / "CURRENT", mp.filename().string() + "\n");
}

std::optional<int> ModelStore::current_version() const {
    std::ifstream in(dir_ / "CURRENT");
    if (!in) return std::nullopt;
    std::string name;
    std::getline(in, name);
    int v = 0;
    if (std::sscanf(name.c_str(), "model-%d.json", &v) != 1)
        throw ParseError("corrupt CURRENT pointer: '" + name + "'");
    return v;
}

PredictionModel ModelStore::load_current() const {
    auto v = current_version();
    if (!v) throw StateError("no model published in " + dir_.string());
    return PredictionModel::from_json(read_text(model_path(*v)));
}

} // namespace smartpick
